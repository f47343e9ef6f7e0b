//! Exact affine functions of λ, piecewise-affine functions, and lower
//! envelopes with rational breakpoints.

use crate::rat::Rat;
use num_traits::Zero;

/// An affine function `λ ↦ slope·λ + intercept` with exact coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineFn {
    /// Slope coefficient.
    pub slope: Rat,
    /// Constant term.
    pub intercept: Rat,
}

impl AffineFn {
    /// Builds an affine function.
    pub fn new(slope: Rat, intercept: Rat) -> Self {
        AffineFn { slope, intercept }
    }

    /// The constant function.
    pub fn constant(value: Rat) -> Self {
        AffineFn { slope: Rat::zero(), intercept: value }
    }

    /// Evaluates at λ.
    pub fn eval(&self, lambda: &Rat) -> Rat {
        &self.slope * lambda + &self.intercept
    }

    /// Crossing point with another line, if the slopes differ.
    pub fn crossing(&self, other: &AffineFn) -> Option<Rat> {
        if self.slope == other.slope {
            return None;
        }
        Some((&other.intercept - &self.intercept) / (&self.slope - &other.slope))
    }

    /// Pointwise sum.
    pub fn add(&self, other: &AffineFn) -> AffineFn {
        AffineFn { slope: &self.slope + &other.slope, intercept: &self.intercept + &other.intercept }
    }

    /// Pointwise difference.
    pub fn sub(&self, other: &AffineFn) -> AffineFn {
        AffineFn { slope: &self.slope - &other.slope, intercept: &self.intercept - &other.intercept }
    }

    /// Pointwise scaling by a constant.
    pub fn scale(&self, factor: &Rat) -> AffineFn {
        AffineFn { slope: &self.slope * factor, intercept: &self.intercept * factor }
    }
}

/// A continuous piecewise-affine function on a closed interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseAffine {
    /// Piece boundaries, ascending; `breakpoints.len() = pieces.len() + 1`.
    pub breakpoints: Vec<Rat>,
    /// Affine piece on each `[breakpoints[i], breakpoints[i+1]]`.
    pub pieces: Vec<AffineFn>,
}

impl PiecewiseAffine {
    /// Domain of definition.
    pub fn domain(&self) -> (&Rat, &Rat) {
        (self.breakpoints.first().unwrap(), self.breakpoints.last().unwrap())
    }

    /// Evaluates at a point of the domain.
    pub fn eval(&self, lambda: &Rat) -> Rat {
        let (lo, hi) = self.domain();
        assert!(lambda >= lo && lambda <= hi, "evaluation outside the domain");
        let piece = self
            .breakpoints
            .windows(2)
            .position(|w| lambda >= &w[0] && lambda <= &w[1])
            .expect("domain covers lambda");
        self.pieces[piece].eval(lambda)
    }

    /// Interior breakpoints (excluding the domain endpoints).
    pub fn interior_breakpoints(&self) -> &[Rat] {
        &self.breakpoints[1..self.breakpoints.len() - 1]
    }
}

/// Exact lower envelope (pointwise minimum) of full lines over a closed
/// interval. Candidate breakpoints are all pairwise crossings inside the
/// interval; adjacent pieces with the same line are merged, so the piece
/// count never exceeds the input count.
pub fn lower_envelope(lines: &[AffineFn], lo: &Rat, hi: &Rat) -> PiecewiseAffine {
    assert!(!lines.is_empty(), "lower envelope of an empty set");
    assert!(lo < hi, "envelope interval must be nondegenerate");
    let mut cuts: Vec<Rat> = vec![lo.clone(), hi.clone()];
    for a in 0..lines.len() {
        for b in (a + 1)..lines.len() {
            if let Some(x) = lines[a].crossing(&lines[b]) {
                if &x > lo && &x < hi {
                    cuts.push(x);
                }
            }
        }
    }
    cuts.sort();
    cuts.dedup();

    let two = crate::rat::rat_int(2);
    let mut breakpoints: Vec<Rat> = vec![lo.clone()];
    let mut pieces: Vec<AffineFn> = Vec::new();
    for w in cuts.windows(2) {
        let mid = (&w[0] + &w[1]) / &two;
        let best = lines
            .iter()
            .min_by(|a, b| {
                // Tie-break by slope so equal-at-midpoint lines pick the true
                // minimum on the whole open piece (lines can only touch at
                // crossings, which are piece boundaries).
                (a.eval(&mid), &a.slope).cmp(&(b.eval(&mid), &b.slope))
            })
            .expect("nonempty line set");
        if pieces.last() == Some(best) {
            *breakpoints.last_mut().unwrap() = w[1].clone();
            continue;
        }
        pieces.push(best.clone());
        breakpoints.push(w[1].clone());
    }
    PiecewiseAffine { breakpoints, pieces }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};

    #[test]
    fn envelope_of_two_crossing_lines() {
        let id = AffineFn::new(rat_int(1), rat_int(0));
        let one = AffineFn::constant(rat_int(1));
        let env = lower_envelope(&[id.clone(), one.clone()], &rat_int(0), &rat_int(2));
        assert_eq!(env.breakpoints, vec![rat_int(0), rat_int(1), rat_int(2)]);
        assert_eq!(env.pieces, vec![id, one]);
        assert_eq!(env.eval(&rat(1, 2)), rat(1, 2));
        assert_eq!(env.eval(&rat(3, 2)), rat_int(1));
    }

    #[test]
    fn envelope_of_single_line_is_itself() {
        let f = AffineFn::new(rat(1, 3), rat(2, 7));
        let env = lower_envelope(&[f.clone()], &rat_int(0), &rat_int(5));
        assert_eq!(env.pieces, vec![f]);
        assert_eq!(env.interior_breakpoints().len(), 0);
    }

    #[test]
    fn envelope_matches_direct_minimum_at_samples() {
        // Deterministic pseudo-random lines; compare against the direct min.
        let mut lines = Vec::new();
        let mut state: i64 = 12345;
        for _ in 0..20 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = (state >> 33) % 17 - 8;
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = (state >> 33) % 23 - 11;
            lines.push(AffineFn::new(rat(a, 3), rat(b, 2)));
        }
        let env = lower_envelope(&lines, &rat_int(-4), &rat_int(4));
        assert!(env.pieces.len() <= lines.len());
        for t in 0..=100 {
            let x = rat(-400 + 8 * t, 100);
            let direct = lines.iter().map(|l| l.eval(&x)).min().unwrap();
            assert_eq!(env.eval(&x), direct, "mismatch at {x}");
        }
    }
}
