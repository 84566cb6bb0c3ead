//! Multiplicity structure of the m-th ordered eigenvalue.
//!
//! Two neighbouring eigenvalues belong to the same cluster when their gap
//! is at most `cluster_tol`; clusters are the maximal chains of such pairs.
//! For a rank `m` the cluster covers ranks `lo..=hi` and
//!
//! * `i = m − lo + 1` counts the members ranked at or before `m`,
//! * `j = hi − m` counts the members ranked after `m`,
//! * `r = i + j` is the multiplicity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cluster bookkeeping for one rank. All indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterIndex {
    pub m: usize,
    pub i: usize,
    pub j: usize,
    pub r: usize,
    /// The eigenvalue at rank `m`.
    pub value: f64,
    pub lo: usize,
    pub hi: usize,
    /// `λ_lo − λ_hi`; may exceed `tol` for chained clusters.
    pub width: f64,
    #[serde(rename = "tol")]
    pub tol_used: f64,
}

impl ClusterIndex {
    /// Zero-based column range `lo−1..hi` of the cluster.
    pub fn columns(&self) -> std::ops::Range<usize> {
        self.lo - 1..self.hi
    }

    /// The cluster seen from another member rank `k ∈ lo..=hi`.
    pub fn for_member(&self, k: usize, value: f64) -> ClusterIndex {
        assert!(self.lo <= k && k <= self.hi, "rank {k} outside cluster");
        ClusterIndex {
            m: k,
            i: k - self.lo + 1,
            j: self.hi - k,
            value,
            ..*self
        }
    }
}

/// Default tolerance `1e-8 · max(1, scale)`, with `scale` typically `‖A‖_F`.
pub fn default_cluster_tol(scale: f64) -> f64 {
    1e-8 * scale.max(1.0)
}

/// Locates the chained cluster containing rank `m` (1-based).
pub fn locate_cluster(eigenvalues: &[f64], m: usize, cluster_tol: f64) -> Result<ClusterIndex> {
    let n = eigenvalues.len();
    if m == 0 || m > n {
        return Err(Error::IndexOutOfRange { index: m, max: n });
    }
    if cluster_tol.is_nan() || cluster_tol < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "cluster tolerance must be non-negative, got {cluster_tol}"
        )));
    }
    if let Some(k) = eigenvalues.windows(2).position(|w| w[0] < w[1]) {
        return Err(Error::NonMonotone { position: k + 1 });
    }

    // zero-based scan outward from m−1
    let mut lo = m - 1;
    while lo > 0 && eigenvalues[lo - 1] - eigenvalues[lo] <= cluster_tol {
        lo -= 1;
    }
    let mut hi = m - 1;
    while hi + 1 < n && eigenvalues[hi] - eigenvalues[hi + 1] <= cluster_tol {
        hi += 1;
    }
    let (lo, hi) = (lo + 1, hi + 1);
    let i = m - lo + 1;
    let j = hi - m;
    Ok(ClusterIndex {
        m,
        i,
        j,
        r: i + j,
        value: eigenvalues[m - 1],
        lo,
        hi,
        width: eigenvalues[lo - 1] - eigenvalues[hi - 1],
        tol_used: cluster_tol,
    })
}

/// Smallest gap separating the cluster from its neighbours.
///
/// Returns `+∞` when the cluster spans the whole list.
pub fn cluster_gap_guard(eigenvalues: &[f64], c: &ClusterIndex) -> f64 {
    let above = if c.lo > 1 {
        eigenvalues[c.lo - 2] - eigenvalues[c.lo - 1]
    } else {
        f64::INFINITY
    };
    let below = if c.hi < eigenvalues.len() {
        eigenvalues[c.hi - 1] - eigenvalues[c.hi]
    } else {
        f64::INFINITY
    };
    above.min(below)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn interior_cluster() {
        let l = [5.0, 3.0, 3.0, 3.0, 1.0];
        let c = locate_cluster(&l, 3, 1e-8).unwrap();
        assert_eq!((c.i, c.j, c.r, c.lo, c.hi), (2, 1, 3, 2, 4));
        assert_eq!(c.value, 3.0);
        assert_eq!(cluster_gap_guard(&l, &c), 2.0);
    }

    #[test]
    fn simple_first_and_last() {
        let c = locate_cluster(&[7.0, 4.0, 2.0], 2, 1e-8).unwrap();
        assert_eq!((c.i, c.j, c.r), (1, 0, 1));

        let l = [3.0, 3.0, 3.0];
        let last = locate_cluster(&l, 3, 1e-8).unwrap();
        assert_eq!((last.i, last.j), (3, 0));
        let first = locate_cluster(&l, 1, 1e-8).unwrap();
        assert_eq!((first.i, first.j), (1, 2));
        assert_eq!(cluster_gap_guard(&l, &first), f64::INFINITY);
    }

    #[test]
    fn chaining_absorbs_near_ties() {
        let l = [3.0 + 1e-12, 3.0, 1.0];
        let c = locate_cluster(&l, 2, 1e-8).unwrap();
        assert_eq!((c.lo, c.hi, c.i, c.j), (1, 2, 2, 0));
        assert_eq!(cluster_gap_guard(&l, &c), 2.0);

        // each gap below tol, total width well above it
        let chain = [1.0, 1.0 - 0.9e-8, 1.0 - 1.8e-8, 1.0 - 2.7e-8, 0.0];
        let c = locate_cluster(&chain, 1, 1e-8).unwrap();
        assert_eq!(c.hi, 4);
        assert!(c.width > 2.0 * 1e-8);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            locate_cluster(&[1.0, 0.0], 3, 0.0),
            Err(Error::IndexOutOfRange { index: 3, max: 2 })
        ));
        assert!(matches!(
            locate_cluster(&[1.0], 0, 0.0),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert_eq!(
            locate_cluster(&[1.0, 2.0], 1, 0.0).unwrap_err(),
            Error::NonMonotone { position: 1 }
        );
    }

    #[test]
    fn member_view() {
        let l = [5.0, 3.0, 3.0, 3.0, 1.0];
        let c = locate_cluster(&l, 3, 1e-8).unwrap();
        let d = c.for_member(4, 3.0);
        assert_eq!(d, locate_cluster(&l, 4, 1e-8).unwrap());
    }

    fn sorted_list() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-3i32..3, 1..12).prop_map(|mut v| {
            v.sort_unstable_by(|a, b| b.cmp(a));
            v.into_iter().map(f64::from).collect()
        })
    }

    proptest! {
        #[test]
        fn cluster_is_maximal_block(l in sorted_list(), pick in 0usize..64, tol in 0.0f64..1.5) {
            let m = pick % l.len() + 1;
            let c = locate_cluster(&l, m, tol).unwrap();
            prop_assert!(c.lo <= m && m <= c.hi);
            prop_assert_eq!(c.r, c.i + c.j);
            for k in c.lo..c.hi {
                prop_assert!(l[k - 1] - l[k] <= tol);
            }
            if c.lo > 1 {
                prop_assert!(l[c.lo - 2] - l[c.lo - 1] > tol);
            }
            if c.hi < l.len() {
                prop_assert!(l[c.hi - 1] - l[c.hi] > tol);
            }
            prop_assert!(cluster_gap_guard(&l, &c) > tol);
        }

        #[test]
        fn shift_invariance(l in sorted_list(), pick in 0usize..64, shift in -4i32..4) {
            let m = pick % l.len() + 1;
            let shifted: Vec<f64> = l.iter().map(|x| x + f64::from(shift)).collect();
            let a = locate_cluster(&l, m, 0.5).unwrap();
            let b = locate_cluster(&shifted, m, 0.5).unwrap();
            prop_assert_eq!((a.i, a.j, a.r), (b.i, b.j, b.r));
        }

        #[test]
        fn exact_ties_at_zero_tolerance(l in sorted_list(), pick in 0usize..64) {
            let m = pick % l.len() + 1;
            let c = locate_cluster(&l, m, 0.0).unwrap();
            let v = l[m - 1];
            prop_assert_eq!(c.i, 1 + l[..m - 1].iter().filter(|&&x| x == v).count());
            prop_assert_eq!(c.j, l[m..].iter().filter(|&&x| x == v).count());
        }
    }
}
