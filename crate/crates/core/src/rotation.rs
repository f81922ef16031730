//! Error-bounded evaluation of the orbit `{nα}` and of `‖nα‖`.
//!
//! Streaming and random access produce bit-identical mantissas, since both are
//! exact integer arithmetic modulo `2^B`. Chunk-parallel evaluation therefore
//! reproduces sequential results regardless of chunk size or worker count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fixed::FixedPointFraction;

/// `‖x‖` must exceed this multiple of the accumulated error bound.
pub const GUARD_FACTOR: f64 = 1024.0;

pub const DEFAULT_CHUNK_SIZE: u64 = 1 << 20;

/// Terms are materialized in windows of this many indices before being handed
/// to the sequential sink.
const WINDOW: u64 = 1 << 22;

/// Streaming cursor over `{nα}`, starting at `n = 0`.
#[derive(Clone, Debug)]
pub struct OrbitCursor {
    alpha: FixedPointFraction,
    n: u64,
    x: FixedPointFraction,
}

impl OrbitCursor {
    pub fn new(alpha: FixedPointFraction) -> Self {
        let x = FixedPointFraction::zero(alpha.bits());
        Self { alpha, n: 0, x }
    }

    /// Cursor positioned at `n = start`, seeded by random access.
    pub fn starting_at(alpha: FixedPointFraction, start: u64) -> Self {
        let x = frac_at(&alpha, start);
        Self { alpha, n: start, x }
    }

    pub fn alpha(&self) -> &FixedPointFraction {
        &self.alpha
    }

    pub fn index(&self) -> u64 {
        self.n
    }

    pub fn current(&self) -> &FixedPointFraction {
        &self.x
    }

    /// Advances to `n + 1` and returns the new state.
    #[inline]
    pub fn advance(&mut self) -> (u64, &FixedPointFraction) {
        self.x.add_assign_mod1(&self.alpha);
        self.n += 1;
        (self.n, &self.x)
    }
}

impl Iterator for OrbitCursor {
    type Item = (u64, FixedPointFraction);

    fn next(&mut self) -> Option<Self::Item> {
        let (n, x) = self.advance();
        Some((n, x.clone()))
    }
}

/// `{nα}` by a single multiplication; error bound `n (err₀ + 1)` ulp.
pub fn frac_at(alpha: &FixedPointFraction, n: u64) -> FixedPointFraction {
    alpha.mul_u64(n).0
}

/// `‖x‖` with the absolute error bound carried over from `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Distance {
    pub value: f64,
    pub err: f64,
}

pub fn dist_to_int(x: &FixedPointFraction) -> Distance {
    Distance {
        value: x.dist_to_int_f64(),
        err: x.error_bound(),
    }
}

/// `‖x‖`, refusing values within [`GUARD_FACTOR`] of the error floor.
#[inline]
pub fn guard(x: &FixedPointFraction, index: u64) -> Result<f64> {
    guard_with(x, index, GUARD_FACTOR)
}

/// Like [`guard`] with an explicit factor. The floor is the tracked error plus
/// one ulp of representation, so an exact zero always fails.
#[inline]
pub fn guard_with(x: &FixedPointFraction, index: u64, factor: f64) -> Result<f64> {
    let d = x.dist_to_int_f64();
    let floor = (x.err_ulp() as f64 + 1.0) * x.ulp();
    if d < factor * floor {
        return Err(Error::SingularitySuspect {
            index,
            distance: d,
            bound: floor,
        });
    }
    Ok(d)
}

/// Evaluates `term(n, {nα})` for `n = first..=last` and feeds the results to
/// `sink` in increasing `n`.
///
/// Terms are computed in parallel over fixed chunks (each chunk seeded with
/// [`frac_at`] and advanced by streaming); `sink` always runs sequentially in
/// index order. On failure the error for the smallest failing `n` is returned.
pub fn drive_orbit<T, F, S>(
    alpha: &FixedPointFraction,
    first: u64,
    last: u64,
    chunk_size: u64,
    term: F,
    mut sink: S,
) -> Result<()>
where
    T: Send,
    F: Fn(u64, &FixedPointFraction) -> Result<T> + Sync,
    S: FnMut(u64, T),
{
    assert!(first >= 1, "orbit indices start at 1");
    if last < first {
        return Ok(());
    }
    let chunk = chunk_size.max(1);
    let per_window = WINDOW.div_ceil(chunk).max(1);
    let mut chunk_start = first;
    while chunk_start <= last {
        let starts: Vec<u64> = (0..per_window)
            .map(|j| chunk_start.saturating_add(j * chunk))
            .take_while(|&s| s <= last)
            .collect();
        let blocks: Vec<Result<Vec<T>>> = starts
            .par_iter()
            .map(|&s| {
                let end = s.saturating_add(chunk - 1).min(last);
                let mut cursor = OrbitCursor::starting_at(alpha.clone(), s - 1);
                let mut out = Vec::with_capacity((end - s + 1) as usize);
                for _ in s..=end {
                    let (n, x) = cursor.advance();
                    out.push(term(n, x)?);
                }
                Ok(out)
            })
            .collect();
        let mut n = chunk_start;
        for block in blocks {
            for v in block? {
                sink(n, v);
                n += 1;
            }
        }
        chunk_start = match starts.last() {
            Some(&s) => match s.checked_add(chunk) {
                Some(next) => next,
                None => break,
            },
            None => break,
        };
    }
    Ok(())
}
