//! Eigenvalues with multiplicities and Jordan chains.
//!
//! Eigenvalues come from the complex Schur form. Nearby eigenvalues are
//! clustered and treated as one eigenvalue; the chains of a cluster are
//! read off the nested kernels of `(A_c - lambda I)^k`, where `A_c` is the
//! restriction of `A` to the cluster's invariant subspace.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::schur::{schur, SchurForm};
use super::{hstack, norm, null_space, orth, singular_values, zeros, CMatrix};
use crate::error::{Error, Result};

/// Relative tolerance for single-linkage clustering of eigenvalues.
pub const CLUSTER_RTOL: f64 = 1e-8;
/// Clusters closer than this (relative) are merged when the merged group
/// looks like a perturbed defective eigenvalue.
pub const MERGE_RTOL: f64 = 1e-5;
/// Relative rank tolerance used on powers of the shifted restriction.
pub const CHAIN_RTOL: f64 = 1e-9;

/// Columns `v_1, ..., v_k` with `(A - lambda I) v_1 = 0` and
/// `(A - lambda I) v_{j+1} = v_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JordanChain {
    #[serde(with = "crate::io::cmatrix_serde")]
    pub vectors: CMatrix,
}

impl JordanChain {
    pub fn len(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.ncols() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenCluster {
    /// Mean of the member eigenvalues.
    #[serde(with = "crate::io::c64_serde")]
    pub value: Complex64,
    pub multiplicity: usize,
    pub chains: Vec<JordanChain>,
}

impl EigenCluster {
    /// Chain lengths in the stored order.
    pub fn partial_multiplicities(&self) -> Vec<usize> {
        self.chains.iter().map(|c| c.len()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenStructure {
    pub clusters: Vec<EigenCluster>,
    pub rank_tolerance: f64,
    pub cluster_tolerance: f64,
}

impl EigenStructure {
    /// Eigenvalues repeated according to algebraic multiplicity.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.clusters
            .iter()
            .flat_map(|c| std::iter::repeat_n(c.value, c.multiplicity))
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.clusters.iter().map(|c| c.multiplicity).sum()
    }

    /// Cluster whose value is nearest to `z`, with the distance.
    pub fn nearest(&self, z: Complex64) -> Option<(&EigenCluster, f64)> {
        self.clusters
            .iter()
            .map(|c| (c, (c.value - z).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Schur form together with the cluster index of every diagonal entry.
#[derive(Debug, Clone)]
pub struct ClusteredSchur {
    pub form: SchurForm,
    pub labels: Vec<usize>,
}

impl ClusteredSchur {
    /// Orthonormal basis of the invariant subspace of the clusters whose
    /// index satisfies `keep`.
    pub fn subspace<F: Fn(usize) -> bool>(&self, keep: F) -> CMatrix {
        let mut form = self.form.clone();
        let flags: Vec<bool> = self.labels.iter().map(|&l| keep(l)).collect();
        let m = form.reorder(&flags);
        form.q.columns(0, m).into_owned()
    }
}

pub fn eig(a: &CMatrix) -> Result<EigenStructure> {
    eig_with_schur(a).map(|(e, _)| e)
}

/// Eigenstructure plus the clustered Schur form it was computed from, so
/// callers can extract spectral subspaces with the same cluster decisions.
pub fn eig_with_schur(a: &CMatrix) -> Result<(EigenStructure, ClusteredSchur)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "eig needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let form = schur(a)?;
    let scale = 1.0 + norm(a);
    let cluster_tol = CLUSTER_RTOL * scale;
    let vals = form.eigenvalues();

    let base = single_linkage(&vals, cluster_tol);
    let coarse = single_linkage(&vals, MERGE_RTOL * scale);

    // Accept a coarse group as one cluster only when its Jordan structure
    // is consistent without forcing; otherwise keep the fine clusters.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for g in coarse {
        let fine: Vec<Vec<usize>> = base
            .iter()
            .filter(|b| g.contains(&b[0]))
            .cloned()
            .collect();
        if fine.len() > 1 && looks_defective(&form, &g, scale) {
            groups.push(g);
        } else {
            groups.extend(fine);
        }
    }

    let mut clusters = Vec::with_capacity(groups.len());
    for g in &groups {
        let mean = g.iter().map(|&i| vals[i]).sum::<Complex64>() / g.len() as f64;
        let chains = cluster_chains(&form, g, scale);
        let total: usize = chains.iter().map(|c| c.len()).sum();
        if total != g.len() {
            return Err(Error::NumericalFailure(format!(
                "Jordan chain extraction at {mean} found {total} of {} vectors",
                g.len()
            )));
        }
        clusters.push((mean, g.clone(), chains));
    }
    clusters.sort_by(|x, y| x.0.re.total_cmp(&y.0.re).then(x.0.im.total_cmp(&y.0.im)));

    let mut labels = vec![0; n];
    let mut out = Vec::with_capacity(clusters.len());
    for (ci, (mean, members, mut chains)) in clusters.into_iter().enumerate() {
        for &i in &members {
            labels[i] = ci;
        }
        chains.sort_by_key(|c| c.len());
        out.push(EigenCluster { value: mean, multiplicity: members.len(), chains });
    }
    Ok((
        EigenStructure {
            clusters: out,
            rank_tolerance: CHAIN_RTOL * scale,
            cluster_tolerance: cluster_tol,
        },
        ClusteredSchur { form, labels },
    ))
}

fn single_linkage(vals: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let n = vals.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (vals[i] - vals[j]).norm() <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_of[r] == usize::MAX {
            root_of[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_of[r]].push(i);
    }
    groups
}

/// Orthonormal basis of the cluster's invariant subspace and the restriction
/// of `A - mean` to it.
fn restrict(form: &SchurForm, members: &[usize]) -> (CMatrix, CMatrix) {
    let n = form.t.nrows();
    let m = members.len();
    let mut f = form.clone();
    let flags: Vec<bool> = (0..n).map(|i| members.contains(&i)).collect();
    f.reorder(&flags);
    let v = f.q.columns(0, m).into_owned();
    let mut nil = f.t.view((0, 0), (m, m)).into_owned();
    let mean = (0..m).map(|i| nil[(i, i)]).sum::<Complex64>() / m as f64;
    for i in 0..m {
        nil[(i, i)] -= mean;
    }
    (v, nil)
}

fn spread(nil: &CMatrix) -> f64 {
    (0..nil.nrows()).map(|i| nil[(i, i)].norm()).fold(0.0, f64::max)
}

/// A group of close eigenvalues is read as one defective eigenvalue when
/// its spread is what a rounding-size perturbation of a nilpotent block of
/// the group's size would produce: `spread^m <= eta * |N|^(m-1)`.
fn looks_defective(form: &SchurForm, members: &[usize], scale: f64) -> bool {
    let (_, nil) = restrict(form, members);
    let m = members.len() as f64;
    let delta = spread(&nil);
    if delta == 0.0 {
        return true;
    }
    let nn = norm(&nil).max(delta);
    m * delta.ln() <= (DEFECT_ETA * scale).ln() + (m - 1.0) * nn.ln()
}

/// Rounding-level perturbation size used by the defectiveness test.
const DEFECT_ETA: f64 = 1e-11;

fn cluster_chains(form: &SchurForm, members: &[usize], scale: f64) -> Vec<JordanChain> {
    let (v, nil) = restrict(form, members);
    restricted_chains(&nil, scale)
        .into_iter()
        .map(|c| JordanChain { vectors: &v * c })
        .collect()
}

/// Chains of a nearly nilpotent `m x m` matrix, built top-down from the
/// nested kernels of its powers. The rank tolerance of the k-th power
/// grows with the eigenvalue spread, which bounds how far the computed
/// restriction is from an exactly nilpotent one.
fn restricted_chains(nil: &CMatrix, scale: f64) -> Vec<CMatrix> {
    let m = nil.nrows();
    let delta = spread(nil);
    let nn = norm(nil).max(1.0);
    let mut kernels: Vec<CMatrix> = vec![zeros(m, 0)];
    let mut power = CMatrix::identity(m, m);
    for k in 1..=m {
        power = nil * power;
        let tol = CHAIN_RTOL * scale.powi(k as i32) + 10.0 * k as f64 * delta * nn.powi(k as i32 - 1);
        let ker = null_space(&power, tol);
        let prev = kernels.last().unwrap().ncols();
        if ker.ncols() >= m {
            kernels.push(CMatrix::identity(m, m));
            break;
        }
        if ker.ncols() <= prev {
            // Stagnation: the restriction spans the generalized eigenspace
            // by construction, so the remaining vectors form the top level.
            kernels.push(CMatrix::identity(m, m));
            break;
        }
        kernels.push(ker);
    }
    if kernels.last().unwrap().ncols() < m {
        kernels.push(CMatrix::identity(m, m));
    }
    let s = kernels.len() - 1;
    let dims: Vec<usize> = kernels.iter().map(|k| k.ncols()).collect();
    let mut chains: Vec<Vec<CMatrix>> = Vec::new();
    // Level-k vectors of chains already started by longer chains.
    let mut level: Vec<CMatrix> = Vec::new();
    for k in (1..=s).rev() {
        let count_k = dims[k] - dims[k - 1];
        let need = count_k.saturating_sub(level.len());
        if need > 0 {
            let mut cols: Vec<&CMatrix> = vec![&kernels[k - 1]];
            cols.extend(level.iter());
            let w = hstack(&cols);
            let wq = orth(&w, 1e-10 * singular_values(&w).first().copied().unwrap_or(0.0));
            let kk = &kernels[k];
            let comp = kk - &wq * (wq.adjoint() * kk);
            let cq = orth(&comp, 1e-8);
            for j in 0..need.min(cq.ncols()) {
                let top = CMatrix::from_column_slice(m, 1, cq.column(j).as_slice());
                let mut vecs = vec![top.clone()];
                for _ in 1..k {
                    let next = nil * vecs.last().unwrap();
                    vecs.push(next);
                }
                vecs.reverse();
                chains.push(vecs);
                level.push(top);
            }
        }
        level = level.iter().map(|x| nil * x).collect();
    }
    chains
        .into_iter()
        .map(|c| {
            let refs: Vec<&CMatrix> = c.iter().collect();
            hstack(&refs)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, from_real};

    #[test]
    fn diagonal() {
        let a = from_real(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let e = eig(&a).unwrap();
        assert_eq!(e.clusters.len(), 2);
        assert!((e.clusters[0].value - c64(1.0, 0.0)).norm() < 1e-14);
        assert!((e.clusters[1].value - c64(2.0, 0.0)).norm() < 1e-14);
        assert_eq!(e.clusters[0].partial_multiplicities(), vec![1]);
        assert_eq!(e.clusters[1].partial_multiplicities(), vec![1]);
    }

    #[test]
    fn nilpotent_block() {
        let a = from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let e = eig(&a).unwrap();
        assert_eq!(e.clusters.len(), 1);
        assert_eq!(e.clusters[0].partial_multiplicities(), vec![2]);
        let v = &e.clusters[0].chains[0].vectors;
        let t = &a - CMatrix::identity(2, 2) * e.clusters[0].value;
        assert!((&t * v.column(0)).norm() < 1e-12);
        assert!((&t * v.column(1) - v.column(0)).norm() < 1e-12);
    }

    #[test]
    fn mixed_jordan_structure() {
        // Blocks J_3(0.5), J_1(0.5), J_2(-1), J_1(2) under a fixed similarity.
        let mut j = zeros(7, 7);
        let diag = [0.5, 0.5, 0.5, 0.5, -1.0, -1.0, 2.0];
        for i in 0..7 {
            j[(i, i)] = c64(diag[i], 0.0);
        }
        j[(0, 1)] = c64(1.0, 0.0);
        j[(1, 2)] = c64(1.0, 0.0);
        j[(4, 5)] = c64(1.0, 0.0);
        let s = CMatrix::from_fn(7, 7, |r, c| {
            c64(((r * 7 + c) as f64 * 0.37).sin(), ((r + 2 * c) as f64 * 0.11).cos() * 0.3)
        }) + CMatrix::identity(7, 7) * c64(3.0, 0.0);
        let a = &s * j * s.clone().try_inverse().unwrap();
        let e = eig(&a).unwrap();
        assert_eq!(e.clusters.len(), 3);
        assert_eq!(e.clusters[0].partial_multiplicities(), vec![2]);
        assert_eq!(e.clusters[1].partial_multiplicities(), vec![1, 3]);
        assert_eq!(e.clusters[2].partial_multiplicities(), vec![1]);
        for c in &e.clusters {
            let t = &a - CMatrix::identity(7, 7) * c.value;
            for ch in &c.chains {
                let v = &ch.vectors;
                assert!((&t * v.column(0)).norm() < 1e-6 * v.column(0).norm());
                for k in 1..v.ncols() {
                    let r = &t * v.column(k) - v.column(k - 1);
                    assert!(r.norm() < 1e-6 * v.column(k).norm());
                }
            }
        }
    }

    #[test]
    fn companion_roots() {
        let mut a = zeros(6, 6);
        for i in 1..6 {
            a[(i, i - 1)] = c64(1.0, 0.0);
        }
        a[(0, 5)] = c64(2.0, 0.0);
        let e = eig(&a).unwrap();
        let r = 2f64.powf(1.0 / 6.0);
        let mut expected: Vec<Complex64> = (0..6)
            .map(|k| Complex64::from_polar(r, k as f64 * std::f64::consts::PI / 3.0))
            .collect();
        expected.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        let got = e.eigenvalues();
        for (g, x) in got.iter().zip(&expected) {
            assert!((g - x).norm() < 1e-12, "{g} vs {x}");
        }
    }

    #[test]
    fn distinct_close_eigenvalues_stay_separate() {
        let a = from_real(2, 2, &[1.0, 0.0, 0.0, 1.0 + 1e-6]);
        let e = eig(&a).unwrap();
        assert_eq!(e.clusters.len(), 2);
    }
}
