//! Closed intervals and finite unions of them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed interval `[lo, hi]` with `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::domain("interval", format!("[{lo}, {hi}] is not a valid interval")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.hi == self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Uniform grid of `points` values including both endpoints.
    pub fn grid(&self, points: usize) -> impl Iterator<Item = f64> + '_ {
        let steps = points.max(2) - 1;
        let h = self.len() / steps as f64;
        (0..=steps).map(move |i| if i == steps { self.hi } else { self.lo + h * i as f64 })
    }
}

/// A finite union of pairwise disjoint closed intervals, sorted.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Interval>", into = "Vec<Interval>")]
pub struct IntervalSet {
    components: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet::default()
    }

    pub fn single(lo: f64, hi: f64) -> Result<Self> {
        Ok(IntervalSet {
            components: vec![Interval::new(lo, hi)?],
        })
    }

    /// Build from arbitrary intervals; overlapping or touching pieces are merged.
    pub fn from_intervals<I>(intervals: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut parts = intervals
            .into_iter()
            .map(|(lo, hi)| Interval::new(lo, hi))
            .collect::<Result<Vec<_>>>()?;
        parts.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut merged: Vec<Interval> = Vec::with_capacity(parts.len());
        for p in parts {
            match merged.last_mut() {
                Some(last) if p.lo <= last.hi => last.hi = last.hi.max(p.hi),
                _ => merged.push(p),
            }
        }
        Ok(IntervalSet { components: merged })
    }

    pub fn components(&self) -> &[Interval] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Total length.
    pub fn measure(&self) -> f64 {
        self.components.iter().map(Interval::len).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        // components are sorted, so binary search on the left endpoints
        let idx = self.components.partition_point(|c| c.lo <= x);
        idx > 0 && self.components[idx - 1].hi >= x
    }

    /// Smallest interval containing every component.
    pub fn hull(&self) -> Option<Interval> {
        Some(Interval {
            lo: self.components.first()?.lo,
            hi: self.components.last()?.hi,
        })
    }

    pub fn is_subset_of(&self, outer: &Interval) -> bool {
        self.hull().is_none_or(|h| outer.contains_interval(&h))
    }

    /// Length of the intersection with `[lo, hi]`.
    pub fn measure_within(&self, lo: f64, hi: f64) -> f64 {
        self.components
            .iter()
            .map(|c| (c.hi.min(hi) - c.lo.max(lo)).max(0.0))
            .sum()
    }

    /// Intersection with a single interval.
    pub fn clip(&self, lo: f64, hi: f64) -> IntervalSet {
        let components = self
            .components
            .iter()
            .filter_map(|c| {
                let l = c.lo.max(lo);
                let h = c.hi.min(hi);
                (l <= h).then_some(Interval { lo: l, hi: h })
            })
            .collect();
        IntervalSet { components }
    }

    /// All component endpoints, sorted.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.components.iter().flat_map(|c| [c.lo, c.hi]).collect()
    }

    /// Component-wise containment up to `tol`: every component of `self` lies in
    /// some component of `other` widened by `tol`.
    pub fn is_contained_in(&self, other: &IntervalSet, tol: f64) -> bool {
        self.components.iter().all(|c| {
            other
                .components
                .iter()
                .any(|o| o.lo - tol <= c.lo && c.hi <= o.hi + tol)
        })
    }
}

impl TryFrom<Vec<Interval>> for IntervalSet {
    type Error = Error;

    fn try_from(v: Vec<Interval>) -> Result<Self> {
        IntervalSet::from_intervals(v.into_iter().map(|i| (i.lo, i.hi)))
    }
}

impl From<IntervalSet> for Vec<Interval> {
    fn from(s: IntervalSet) -> Self {
        s.components
    }
}

/// Text form: one `lo hi` pair per line; `#` starts a comment.
impl FromStr for IntervalSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = Vec::new();
        for (i, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse { line: i + 1, reason: e.to_string() })?;
            if nums.len() != 2 {
                return Err(Error::Parse {
                    line: i + 1,
                    reason: format!("expected `lo hi`, found {} numbers", nums.len()),
                });
            }
            parts.push((nums[0], nums[1]));
        }
        IntervalSet::from_intervals(parts)
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.components {
            writeln!(f, "{:?} {:?}", c.lo, c.hi)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_and_sorts() {
        let s = IntervalSet::from_intervals([(0.5, 0.7), (0.0, 0.2), (0.1, 0.3), (0.7, 0.8)]).unwrap();
        assert_eq!(s.components().len(), 2);
        assert_eq!(s.components()[0], Interval { lo: 0.0, hi: 0.3 });
        assert_eq!(s.components()[1], Interval { lo: 0.5, hi: 0.8 });
        assert!((s.measure() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn rejects_reversed() {
        assert!(IntervalSet::single(1.0, 0.0).is_err());
        assert!(IntervalSet::single(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn membership_and_partial_measure() {
        let s = IntervalSet::from_intervals([(0.0, 0.2), (0.5, 0.8)]).unwrap();
        assert!(s.contains(0.2));
        assert!(!s.contains(0.3));
        assert!(s.contains(0.5));
        assert!((s.measure_within(0.1, 0.6) - 0.2).abs() < 1e-15);
        assert_eq!(s.clip(0.1, 0.6).components().len(), 2);
    }

    #[test]
    fn text_round_trip() {
        let s: IntervalSet = "# E\n0 0.25\n0.5 1\n".parse().unwrap();
        let back: IntervalSet = s.to_string().parse().unwrap();
        assert_eq!(s, back);
        assert!("0 1 2".parse::<IntervalSet>().is_err());
    }

    #[test]
    fn serde_normalizes() {
        let s: IntervalSet = serde_json::from_str(r#"[{"lo":0.5,"hi":1.0},{"lo":0.0,"hi":0.6}]"#).unwrap();
        assert_eq!(s.components().len(), 1);
    }
}
