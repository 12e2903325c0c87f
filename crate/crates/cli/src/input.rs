//! Row-oriented text input.
//!
//! Vertex rows are `vertex_id,label`; point rows are `x1,…,xd,label`; edge
//! rows are `u,v`. Blank lines and text after `#` are ignored. An optional
//! first row `labels: a,b,c` fixes the label order; without it every label
//! must be a number.

use std::path::Path;

use isorelabel::{validate, Instance, LabelFunction, LabelScale, OrderSpec};

use crate::error::CliError;

/// Order variant of an input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OrderArg {
    Linear,
    Dag,
    Points,
}

pub fn read_source(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)
            .map_err(|e| CliError::Io(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

/// Non-empty rows with their 1-based line numbers, comments stripped.
fn rows(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn fields(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

fn parse_num<T: std::str::FromStr>(line: usize, token: &str, what: &str) -> Result<T, CliError> {
    token.parse().map_err(|_| CliError::Parse {
        line,
        msg: format!("bad {what} {token:?}"),
    })
}

fn parse_finite(token: &str) -> Option<f64> {
    token.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Label tokens and the scale they live on.
fn build_labels(
    header: Option<Vec<String>>,
    tokens: &[(usize, String)],
) -> Result<(LabelScale, LabelFunction), CliError> {
    match header {
        Some(labels) => {
            let ranks = tokens
                .iter()
                .map(|(line, t)| {
                    labels
                        .iter()
                        .position(|l| l == t)
                        .map(|i| i + 1)
                        .ok_or_else(|| CliError::Parse {
                            line: *line,
                            msg: format!("label {t:?} is not declared in the labels: header"),
                        })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let values: Option<Vec<f64>> = labels.iter().map(|l| parse_finite(l)).collect();
            let scale = match values {
                Some(v) => LabelScale::with_values(labels, v)?,
                None => LabelScale::ordinal(labels)?,
            };
            Ok((scale, LabelFunction::new(ranks)))
        }
        None => {
            let data = tokens
                .iter()
                .map(|(line, t)| {
                    parse_finite(t).ok_or_else(|| CliError::Parse {
                        line: *line,
                        msg: format!(
                            "label {t:?} is not numeric; declare a labels: header for ordinal data"
                        ),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(LabelScale::from_data(&data)?)
        }
    }
}

fn split_header(text: &str) -> (Option<Vec<String>>, Vec<(usize, &str)>) {
    let mut all: Vec<(usize, &str)> = rows(text).collect();
    let header = match all.first() {
        Some((_, line)) if line.starts_with("labels:") => {
            let labels = fields(&line["labels:".len()..])
                .into_iter()
                .map(String::from)
                .collect();
            all.remove(0);
            Some(labels)
        }
        _ => None,
    };
    (header, all)
}

fn parse_edges(text: &str) -> Result<Vec<(usize, usize)>, CliError> {
    rows(text)
        .map(|(line, row)| match fields(row).as_slice() {
            [u, v] => Ok((
                parse_num(line, u, "vertex id")?,
                parse_num(line, v, "vertex id")?,
            )),
            _ => Err(CliError::Parse {
                line,
                msg: "expected `u,v`".into(),
            }),
        })
        .collect()
}

/// Parses an instance; `edges` is the sidecar text for dags.
pub fn parse_instance(
    order: OrderArg,
    text: &str,
    edges: Option<&str>,
) -> Result<Instance, CliError> {
    let (header, body) = split_header(text);
    let (spec, tokens) = match order {
        OrderArg::Points => {
            let mut d = None;
            let mut coords = Vec::with_capacity(body.len());
            let mut tokens = Vec::with_capacity(body.len());
            for (line, row) in &body {
                let f = fields(row);
                if f.len() < 2 || *d.get_or_insert(f.len() - 1) != f.len() - 1 {
                    return Err(CliError::Parse {
                        line: *line,
                        msg: "expected `x1,…,xd,label` with a fixed d".into(),
                    });
                }
                let (label, xs) = f.split_last().expect("at least two fields");
                coords.push(
                    xs.iter()
                        .map(|x| parse_num(*line, x, "coordinate"))
                        .collect::<Result<Vec<f64>, _>>()?,
                );
                tokens.push((*line, label.to_string()));
            }
            (
                OrderSpec::Points {
                    n: body.len(),
                    d: d.unwrap_or(1),
                    coords,
                },
                tokens,
            )
        }
        OrderArg::Linear | OrderArg::Dag => {
            let n = body.len();
            let mut slots: Vec<Option<(usize, String)>> = vec![None; n];
            for (line, row) in &body {
                let [id, label] = fields(row)[..] else {
                    return Err(CliError::Parse {
                        line: *line,
                        msg: "expected `vertex_id,label`".into(),
                    });
                };
                let id: usize = parse_num(*line, id, "vertex id")?;
                if id >= n || slots[id].is_some() {
                    return Err(CliError::Parse {
                        line: *line,
                        msg: format!("vertex ids must be 0..{n}, each once; got {id}"),
                    });
                }
                slots[id] = Some((*line, label.to_string()));
            }
            let tokens = slots
                .into_iter()
                .map(|s| s.expect("ids are a permutation"))
                .collect();
            let spec = match order {
                OrderArg::Linear => OrderSpec::Linear { n },
                _ => {
                    let text =
                        edges.ok_or_else(|| CliError::Usage("dag input needs --edges".into()))?;
                    OrderSpec::Dag {
                        n,
                        edges: parse_edges(text)?,
                    }
                }
            };
            (spec, tokens)
        }
    };
    let (scale, f) = build_labels(header, &tokens)?;
    Ok(validate(&spec, f, scale)?)
}
