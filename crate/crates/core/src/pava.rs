//! Weighted L2 isotonic regression on a chain (pool adjacent violators).

/// Weighted least-squares nondecreasing fit of `y`.
///
/// # Panics
/// If the lengths differ.
pub fn pava(y: &[f64], w: &[f64]) -> Vec<f64> {
    assert_eq!(y.len(), w.len(), "one weight per value");
    // (weighted mean, total weight, length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(y.len());
    for (&v, &wt) in y.iter().zip(w) {
        let mut cur = (v, wt, 1);
        while let Some(&(m, pw, len)) = blocks.last() {
            if m <= cur.0 {
                break;
            }
            blocks.pop();
            let total = pw + cur.1;
            cur = ((m * pw + cur.0 * cur.1) / total, total, len + cur.2);
        }
        blocks.push(cur);
    }
    blocks
        .into_iter()
        .flat_map(|(m, _, len)| std::iter::repeat_n(m, len))
        .collect()
}

/// Incremental L2 fit of a growing interior: pooled blocks with prefix sums
/// over blocks, so that the cost of clamping the fit into `[a, b]` is a
/// couple of binary searches.
#[derive(Debug, Default)]
pub(crate) struct PooledPrefix {
    mean: Vec<f64>,
    cnt: Vec<f64>,
    s1: Vec<f64>,
    s2: Vec<f64>,
    // cumulative over blocks, one longer than the block list
    pc: Vec<f64>,
    p1: Vec<f64>,
    p2: Vec<f64>,
    psse: Vec<f64>,
}

impl PooledPrefix {
    pub(crate) fn new() -> Self {
        Self {
            pc: vec![0.0],
            p1: vec![0.0],
            p2: vec![0.0],
            psse: vec![0.0],
            ..Self::default()
        }
    }

    pub(crate) fn push(&mut self, x: f64) {
        let (mut c, mut s1, mut s2) = (1.0, x, x * x);
        while let Some(&m) = self.mean.last() {
            if m <= s1 / c {
                break;
            }
            self.mean.pop();
            c += self.cnt.pop().unwrap();
            s1 += self.s1.pop().unwrap();
            s2 += self.s2.pop().unwrap();
            self.pc.pop();
            self.p1.pop();
            self.p2.pop();
            self.psse.pop();
        }
        let k = self.mean.len();
        self.mean.push(s1 / c);
        self.cnt.push(c);
        self.s1.push(s1);
        self.s2.push(s2);
        self.pc.push(self.pc[k] + c);
        self.p1.push(self.p1[k] + s1);
        self.p2.push(self.p2[k] + s2);
        self.psse.push(self.psse[k] + (s2 - s1 * s1 / c).max(0.0));
    }

    pub(crate) fn clamped_cost(&self, a: f64, b: f64) -> f64 {
        let nb = self.mean.len();
        let low = self.mean.partition_point(|&m| m < a);
        let high = self.mean.partition_point(|&m| m <= b).max(low);
        let at = |x: f64, from: usize, to: usize| {
            if from == to {
                return 0.0;
            }
            let c = self.pc[to] - self.pc[from];
            let s1 = self.p1[to] - self.p1[from];
            let s2 = self.p2[to] - self.p2[from];
            (s2 - 2.0 * x * s1 + x * x * c).max(0.0)
        };
        at(a, 0, low) + (self.psse[high] - self.psse[low]) + at(b, high, nb)
    }
}
