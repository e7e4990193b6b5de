//! Plain-text model and discrete-distribution files.
//!
//! Model file:
//!
//! ```text
//! format_version 1
//! kernel gauss:1.0
//! loss hinge
//! lambda 1.0000000000000000e-1
//! points 2
//! x -1.0000000000000000e0
//! x 1.0000000000000000e0
//! coefficients
//! -2.5000000000000000e-1
//! 2.5000000000000000e-1
//! ```
//!
//! Points are `x v₁ v₂ …` for real vectors or `s <text>` for strings, with
//! `\\`, `\n` and `\r` escaped. Reals are written with 17 significant digits,
//! so a save/load round trip reproduces every value exactly.
//!
//! Discrete joint file: the number of atoms `m` on the first line, then `m`
//! rows `x₁ … x_d p η`. Blank lines and `#` comments are ignored.

use std::fmt::Write as _;

use margin_core::analysis::DiscreteJoint;
use margin_core::classify::{Model, MODEL_FORMAT_VERSION};
use margin_core::kernels::{Kernel, Point};
use margin_core::losses::Loss;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("model format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("unexpected end of file: {0}")]
    Truncated(&'static str),
    #[error("invalid model: {0}")]
    Invalid(String),
}

/// Fixed 17-significant-digit rendering.
pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('\n', "\\n").replace('\r', "\\r")
}

fn unescape(s: &str, line: usize) -> Result<String, FormatError> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            other => {
                return Err(FormatError::Syntax {
                    line,
                    message: format!("bad escape \\{}", other.map(String::from).unwrap_or_default()),
                })
            }
        }
    }
    Ok(out)
}

pub fn write_model(model: &Model) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "format_version {}", model.format_version);
    let _ = writeln!(out, "kernel {}", model.kernel);
    let _ = writeln!(out, "loss {}", model.loss);
    let _ = writeln!(out, "lambda {}", real(model.lambda));
    let _ = writeln!(out, "points {}", model.points.len());
    for p in &model.points {
        match p {
            Point::Real(v) => {
                out.push('x');
                for x in v {
                    out.push(' ');
                    out.push_str(&real(*x));
                }
                out.push('\n');
            }
            Point::Text(s) => {
                let _ = writeln!(out, "s {}", escape(s));
            }
        }
    }
    out.push_str("coefficients\n");
    for c in &model.coefficients {
        let _ = writeln!(out, "{}", real(*c));
    }
    out
}

/// Non-empty lines with their 1-based numbers, comments stripped. Text
/// points keep their content verbatim.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = if l.starts_with("s ") {
            l
        } else {
            l.split('#').next().unwrap_or("").trim()
        };
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn parse_f64(raw: &str, line: usize) -> Result<f64, FormatError> {
    raw.parse().map_err(|_| FormatError::Syntax {
        line,
        message: format!("{raw:?} is not a number"),
    })
}

fn keyed<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    key: &'static str,
) -> Result<(usize, &'a str), FormatError> {
    let (line, l) = lines.next().ok_or(FormatError::Truncated(key))?;
    match l.split_once(' ') {
        Some((k, v)) if k == key => Ok((line, v.trim())),
        _ => Err(FormatError::Syntax {
            line,
            message: format!("expected `{key} …`"),
        }),
    }
}

pub fn read_model(text: &str) -> Result<Model, FormatError> {
    let mut lines = content_lines(text);
    let syntax = |line: usize, message: String| FormatError::Syntax { line, message };

    let (line, v) = keyed(&mut lines, "format_version")?;
    let found: u32 = v.parse().map_err(|_| syntax(line, format!("bad version {v:?}")))?;
    if found != MODEL_FORMAT_VERSION {
        return Err(FormatError::VersionMismatch {
            found,
            expected: MODEL_FORMAT_VERSION,
        });
    }
    let (line, v) = keyed(&mut lines, "kernel")?;
    let kernel: Kernel = v.parse().map_err(|e| syntax(line, format!("{e}")))?;
    let (line, v) = keyed(&mut lines, "loss")?;
    let loss: Loss = v.parse().map_err(|e| syntax(line, format!("{e}")))?;
    let (line, v) = keyed(&mut lines, "lambda")?;
    let lambda = parse_f64(v, line)?;
    let (line, v) = keyed(&mut lines, "points")?;
    let n: usize = v.parse().map_err(|_| syntax(line, format!("bad count {v:?}")))?;

    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, l) = lines.next().ok_or(FormatError::Truncated("points"))?;
        if let Some(rest) = l.strip_prefix("s ") {
            points.push(Point::Text(unescape(rest, line)?));
        } else if l == "x" || l.starts_with("x ") {
            let v = l[1..]
                .split_whitespace()
                .map(|t| parse_f64(t, line))
                .collect::<Result<Vec<_>, _>>()?;
            points.push(Point::Real(v));
        } else {
            return Err(syntax(line, "expected a point row (`x …` or `s …`)".into()));
        }
    }
    let (line, l) = lines.next().ok_or(FormatError::Truncated("coefficients"))?;
    if l != "coefficients" {
        return Err(syntax(line, "expected `coefficients`".into()));
    }
    let mut coefficients = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, l) = lines.next().ok_or(FormatError::Truncated("coefficients"))?;
        coefficients.push(parse_f64(l, line)?);
    }
    if let Some((line, _)) = lines.next() {
        return Err(syntax(line, "trailing content".into()));
    }
    Model::from_parts(kernel, loss, lambda, points, coefficients).map_err(|e| FormatError::Invalid(e.to_string()))
}

pub fn write_joint(d: &DiscreteJoint) -> String {
    let mut out = format!("{}\n", d.len());
    for ((x, p), e) in d.support().iter().zip(d.marginal()).zip(d.eta()) {
        let mut cols: Vec<String> = x.iter().map(|v| real(*v)).collect();
        cols.push(real(*p));
        cols.push(real(*e));
        out.push_str(&cols.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_joint(text: &str) -> Result<DiscreteJoint, FormatError> {
    let mut lines = content_lines(text);
    let (line, l) = lines.next().ok_or(FormatError::Truncated("atom count"))?;
    let m: usize = l.parse().map_err(|_| FormatError::Syntax {
        line,
        message: format!("expected the atom count, got {l:?}"),
    })?;
    let mut support = Vec::with_capacity(m);
    let mut marginal = Vec::with_capacity(m);
    let mut eta = Vec::with_capacity(m);
    for _ in 0..m {
        let (line, l) = lines.next().ok_or(FormatError::Truncated("atoms"))?;
        let mut v = l
            .split_whitespace()
            .map(|t| parse_f64(t, line))
            .collect::<Result<Vec<_>, _>>()?;
        if v.len() < 3 {
            return Err(FormatError::Syntax {
                line,
                message: "expected `x… p eta`".into(),
            });
        }
        eta.push(v.pop().unwrap_or_default());
        marginal.push(v.pop().unwrap_or_default());
        support.push(v);
    }
    if let Some((line, _)) = lines.next() {
        return Err(FormatError::Syntax {
            line,
            message: format!("more than {m} atoms"),
        });
    }
    DiscreteJoint::new(support, marginal, eta).map_err(|e| FormatError::Invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> Model {
        Model::from_parts(
            Kernel::gaussian(0.3).unwrap(),
            Loss::Logistic,
            0.1,
            vec![Point::Real(vec![1.0 / 3.0, -2e-300]), Point::Real(vec![f64::MAX, 0.0])],
            vec![std::f64::consts::PI, -1e-17],
        )
        .unwrap()
    }

    #[test]
    fn model_round_trip_is_exact() {
        let m = model();
        assert_eq!(read_model(&write_model(&m)).unwrap(), m);
        let t = Model::from_parts(
            Kernel::spectrum(2).unwrap(),
            Loss::Hinge,
            1.0,
            vec![Point::Text("a\\b\nc # d".into()), Point::Text(String::new())],
            vec![0.5, -0.5],
        )
        .unwrap();
        assert_eq!(read_model(&write_model(&t)).unwrap(), t);
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let text = write_model(&model()).replace("format_version 1", "format_version 2");
        assert_eq!(
            read_model(&text),
            Err(FormatError::VersionMismatch { found: 2, expected: 1 })
        );
    }

    #[test]
    fn bad_models() {
        let text = write_model(&model());
        assert!(matches!(
            read_model(&text.replace("gauss:0.3", "gauss:x")),
            Err(FormatError::Syntax { line: 2, .. })
        ));
        let truncated: String = text.lines().take(7).map(|l| format!("{l}\n")).collect();
        assert!(matches!(read_model(&truncated), Err(FormatError::Truncated(_))));
        assert!(read_model(&format!("{text}1.0\n")).is_err());
    }

    #[test]
    fn joint_round_trip() {
        let d = DiscreteJoint::new(vec![vec![0.0, 1.0], vec![2.0, 3.0]], vec![0.25, 0.75], vec![0.5, 1.0]).unwrap();
        assert_eq!(read_joint(&write_joint(&d)).unwrap(), d);
        let parsed = read_joint("# two atoms\n2\n0 0.5 0.5\n1 0.5 0.5 # tie\n").unwrap();
        assert_eq!(parsed.bayes_risk(), 0.5);
        assert!(read_joint("2\n0 0.5 0.5\n").is_err());
        assert!(read_joint("1\n0 0.5 0.5\n").is_err());
    }
}
