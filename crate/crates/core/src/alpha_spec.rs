//! Textual α specifications used by the command line and the Python bindings.
//!
//! ```text
//! golden
//! sqrt:<D>
//! quadratic:<a0>;<pre>|<period>      comma-separated, <pre> may be empty
//! e
//! list:<a1,a2,...>
//! random:<seed>[:<bits>]
//! ```

use std::fmt;
use std::str::FromStr;

use crate::cf::{PartialQuotientSource, SourceKind, DEFAULT_RANDOM_BITS};
use crate::error::{Error, Result};

pub const GRAMMAR: &str = "golden | sqrt:<D> | quadratic:<a0>;<pre>|<period> | e | list:<a1,a2,...> | random:<seed>[:<bits>]";

fn parse_err(spec: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        spec: spec.to_string(),
        reason: reason.into(),
    }
}

fn parse_list(spec: &str, body: &str) -> Result<Vec<u64>> {
    if body.trim().is_empty() {
        return Ok(Vec::new());
    }
    body.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|e| parse_err(spec, format!("bad quotient `{t}`: {e}")))
        })
        .collect()
}

impl FromStr for PartialQuotientSource {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let s = spec.trim();
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        let wrap = |e: Error| match e {
            Error::InvalidArgument(reason) => parse_err(spec, reason),
            other => other,
        };
        match (head, rest) {
            ("golden", None) => Ok(PartialQuotientSource::golden()),
            ("e", None) => Ok(PartialQuotientSource::e()),
            ("sqrt", Some(d)) => {
                let d: u64 = d
                    .trim()
                    .parse()
                    .map_err(|e| parse_err(spec, format!("bad radicand: {e}")))?;
                if d == 0 {
                    return Err(parse_err(spec, "radicand must be positive"));
                }
                PartialQuotientSource::sqrt(d).map_err(wrap)
            }
            ("quadratic", Some(body)) => {
                let (a0, tail) = body
                    .split_once(';')
                    .ok_or_else(|| parse_err(spec, "expected `<a0>;<pre>|<period>`"))?;
                let a0: i64 = a0
                    .trim()
                    .parse()
                    .map_err(|e| parse_err(spec, format!("bad a0: {e}")))?;
                let (pre, period) = tail
                    .split_once('|')
                    .ok_or_else(|| parse_err(spec, "missing `|` before the period"))?;
                PartialQuotientSource::quadratic(
                    a0,
                    parse_list(spec, pre)?,
                    parse_list(spec, period)?,
                )
                .map_err(wrap)
            }
            ("list", Some(body)) => {
                PartialQuotientSource::explicit(0, parse_list(spec, body)?).map_err(wrap)
            }
            ("random", Some(body)) => {
                let mut parts = body.split(':');
                let seed: u64 = parts
                    .next()
                    .unwrap_or("")
                    .trim()
                    .parse()
                    .map_err(|e| parse_err(spec, format!("bad seed: {e}")))?;
                let bits = match parts.next() {
                    Some(b) => b
                        .trim()
                        .parse::<u32>()
                        .map_err(|e| parse_err(spec, format!("bad bit count: {e}")))?,
                    None => DEFAULT_RANDOM_BITS,
                };
                if parts.next().is_some() {
                    return Err(parse_err(spec, "too many `:` fields"));
                }
                PartialQuotientSource::gauss_random(seed, bits).map_err(wrap)
            }
            _ => Err(parse_err(spec, format!("expected one of: {GRAMMAR}"))),
        }
    }
}

fn join(xs: &[u64]) -> String {
    xs.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

impl fmt::Display for PartialQuotientSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SourceKind::Quadratic { preperiod, period } => {
                write!(f, "quadratic:{};{}|{}", self.a0, join(preperiod), join(period))
            }
            SourceKind::EFamily if self.a0 == 2 => write!(f, "e"),
            SourceKind::EFamily => write!(f, "e(a0={})", self.a0),
            SourceKind::Explicit(list) => write!(f, "list:{}", join(list)),
            SourceKind::GaussRandom {
                seed,
                precision_bits,
            } => write!(f, "random:{seed}:{precision_bits}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_form() {
        let g: PartialQuotientSource = "golden".parse().unwrap();
        assert_eq!(g, PartialQuotientSource::golden());
        let s3: PartialQuotientSource = "sqrt:3".parse().unwrap();
        assert_eq!(s3.to_string(), "quadratic:1;|1,2");
        let q: PartialQuotientSource = "quadratic:0;4,5|1,2".parse().unwrap();
        assert_eq!(
            q.kind,
            SourceKind::Quadratic { preperiod: vec![4, 5], period: vec![1, 2] }
        );
        assert_eq!("e".parse::<PartialQuotientSource>().unwrap(), PartialQuotientSource::e());
        let l: PartialQuotientSource = "list:2,2,2".parse().unwrap();
        assert_eq!(l.kind, SourceKind::Explicit(vec![2, 2, 2]));
        let r: PartialQuotientSource = "random:42".parse().unwrap();
        assert_eq!(r.to_string(), format!("random:42:{DEFAULT_RANDOM_BITS}"));
        let r: PartialQuotientSource = "random:42:512".parse().unwrap();
        assert_eq!(r.kind, SourceKind::GaussRandom { seed: 42, precision_bits: 512 });
    }

    #[test]
    fn canonical_form_round_trips() {
        for s in ["quadratic:1;|1", "quadratic:3;2|1,4", "list:1,5,9", "random:3:1024", "e"] {
            let src: PartialQuotientSource = s.parse().unwrap();
            assert_eq!(src.to_string(), s);
        }
    }

    #[test]
    fn rejects_malformed_specs() {
        for s in [
            "pi",
            "sqrt:4",
            "sqrt:x",
            "sqrt:0",
            "quadratic:1;1",
            "quadratic:1;|",
            "quadratic:1;|0",
            "list:",
            "list:1,,2",
            "random:",
            "random:1:2:3",
            "golden:1",
        ] {
            let err = s.parse::<PartialQuotientSource>().unwrap_err();
            assert!(matches!(err, Error::Parse { .. }), "{s}: {err:?}");
        }
    }
}
