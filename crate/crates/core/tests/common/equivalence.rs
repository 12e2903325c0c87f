//! Fast routines against the exhaustive oracle on seeded random instances.

use isorelabel::linear_strong::{strong_l0_ordinal, strong_l0inf_linear, strong_l0p_linear};
use isorelabel::oracle::{
    brute_best_regression, brute_max_isotonic_set, brute_min_trim_err, random_dag, random_linear,
    random_points, Objective, OracleBudget, OracleValue,
};
use isorelabel::penalized::{penalized_linf, penalized_lp};
use isorelabel::relabel::{l0_regression, strong_l0inf, weak_l01, weak_l0inf};
use isorelabel::{is_isotonic, Instance, Norm, RegressionResult};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const ALPHAS: [f64; 3] = [0.1, 1.0, 5.0];
pub const L2_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Linear,
    Dag,
    Points,
}

impl Family {
    #[allow(dead_code)]
    pub const ALL: [Family; 3] = [Family::Linear, Family::Dag, Family::Points];

    pub fn name(self) -> &'static str {
        match self {
            Family::Linear => "linear n<=10 l<=4",
            Family::Dag => "dag n<=9 l<=4",
            Family::Points => "2-d points n<=9 l<=4",
        }
    }

    pub fn instance(self, rng: &mut ChaCha8Rng) -> Instance {
        match self {
            Family::Linear => random_linear(rng, 10, 4),
            Family::Dag => random_dag(rng, 9, 4, 0.3),
            Family::Points => random_points(rng, 9, 2, 4),
        }
    }
}

fn error(value: OracleValue) -> f64 {
    match value {
        OracleValue::Error(e) => e,
        other => panic!("expected an error value, got {other:?}"),
    }
}

fn sum_pow(res: &RegressionResult) -> f64 {
    res.lp_error.expect("an Lp error is reported").sum_pow
}

fn expect(what: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{what}: got {got}, oracle {want}"))
    }
}

fn isotonic(what: &str, inst: &Instance, res: &RegressionResult) -> Result<(), String> {
    if is_isotonic(inst.order(), &res.g) {
        Ok(())
    } else {
        Err(format!("{what}: output {:?} is not isotonic", res.g))
    }
}

/// Compares every applicable routine on `inst` with the oracle.
pub fn check(inst: &Instance) -> Result<(), String> {
    let budget = OracleBudget::default();
    let e = |x: isorelabel::Error| x.to_string();
    let n = inst.len();
    let oracle = |obj: Objective| brute_best_regression(inst, &obj, &budget).map_err(e);

    let (size, sets) = brute_max_isotonic_set(inst, &budget).map_err(e)?;
    let res = l0_regression(inst).map_err(e)?;
    isotonic("l0_regression", inst, &res)?;
    expect("delta_0", res.l0_distance as f64, (n - size) as f64, 0.0)?;

    let mut witnesses = vec![&sets[0]];
    if sets.len() > 1 {
        witnesses.push(&sets[sets.len() - 1]);
    }
    for kept in witnesses {
        let res = weak_l01(inst, kept).map_err(e)?;
        isotonic("weak_l01", inst, &res)?;
        let want = error(
            oracle(Objective::WeakL0p {
                norm: Norm::L1,
                kept: kept.clone(),
            })?
            .value,
        );
        expect("weak L0,1 error", sum_pow(&res), want, 0.0)?;
        let res = weak_l0inf(inst, kept).map_err(e)?;
        isotonic("weak_l0inf", inst, &res)?;
        let want = error(
            oracle(Objective::WeakL0p {
                norm: Norm::LInf,
                kept: kept.clone(),
            })?
            .value,
        );
        expect("weak L0,inf error", sum_pow(&res), want, 0.0)?;
    }

    let trim = brute_min_trim_err(inst, &budget).map_err(e)?;
    let res = strong_l0inf(inst).map_err(e)?;
    isotonic("strong_l0inf", inst, &res)?;
    expect(
        "strong L0,inf trim-err",
        res.threshold.unwrap_or(f64::NAN),
        trim,
        0.0,
    )?;
    expect(
        "strong_l0inf delta_0",
        res.l0_distance as f64,
        (n - size) as f64,
        0.0,
    )?;

    if !inst.order().is_linear() {
        return Ok(());
    }
    let res = strong_l0inf_linear(inst).map_err(e)?;
    isotonic("strong_l0inf_linear", inst, &res)?;
    expect(
        "linear strong L0,inf trim-err",
        res.threshold.unwrap_or(f64::NAN),
        trim,
        0.0,
    )?;

    for (norm, tol) in [(Norm::L1, 0.0), (Norm::L2, L2_TOLERANCE)] {
        let res = strong_l0p_linear(inst, norm).map_err(e)?;
        isotonic("strong_l0p_linear", inst, &res)?;
        expect(
            "strong L0,p delta_0",
            res.l0_distance as f64,
            (n - size) as f64,
            0.0,
        )?;
        let want = error(oracle(Objective::StrongL0p(norm))?.value);
        expect(
            &format!("strong L0,p error ({norm:?})"),
            sum_pow(&res),
            want,
            tol,
        )?;
    }

    let res = strong_l0_ordinal(inst).map_err(e)?;
    isotonic("strong_l0_ordinal", inst, &res)?;
    let OracleValue::Stages(want) = oracle(Objective::StrongL0)?.value else {
        unreachable!("stage objective yields stages")
    };
    if res.stage_counts.as_ref() != Some(&want) {
        return Err(format!(
            "stage vector: got {:?}, oracle {want:?}",
            res.stage_counts
        ));
    }

    for alpha in ALPHAS {
        for norm in [Norm::L1, Norm::L2, Norm::LInf] {
            let res = match norm {
                Norm::LInf => penalized_linf(inst, alpha),
                _ => penalized_lp(inst, alpha, norm),
            }
            .map_err(e)?;
            isotonic("penalized", inst, &res)?;
            let want = error(oracle(Objective::Penalized { norm, alpha })?.value);
            let got = res.objective.unwrap_or(f64::NAN);
            expect(
                &format!("penalized {norm:?} alpha={alpha}"),
                got,
                want,
                L2_TOLERANCE,
            )?;
        }
    }
    Ok(())
}

/// Checks `count` instances of a family drawn from `seed`; reports the
/// first mismatch with its instance.
pub fn run(family: Family, count: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..count {
        let inst = family.instance(&mut rng);
        check(&inst).map_err(|m| {
            let edges: Vec<_> = inst.order().edges().collect();
            format!(
                "{} #{i} (seed {seed}) f={:?} edges={edges:?}: {m}",
                family.name(),
                inst.values()
            )
        })?;
    }
    Ok(())
}
