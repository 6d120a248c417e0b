//! Moving-average coefficients and structural identification.
//!
//! Three identification schemes map reduced-form shocks `u_t` to structural
//! shocks `ε_t = Q⁻¹ u_t` with covariance `Ω = Q⁻¹ Σ Q⁻ᵀ`:
//!
//! * orthogonalized: `Q = M` (Cholesky factor), `Ω = I`;
//! * generalized: `Q = I`, `Ω = Σ`;
//! * clustered: `Q⁻¹` is unit block-lower-triangular under a cluster ordering,
//!   built by projecting each cluster's residuals on all earlier clusters, so
//!   that `Ω` is block diagonal while within-cluster correlation survives.

use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::varnet::VarModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Orthogonalized,
    Generalized,
    Clustered,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Clustered, Scheme::Generalized, Scheme::Orthogonalized];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Orthogonalized => "orthogonalized",
            Scheme::Generalized => "generalized",
            Scheme::Clustered => "clustered",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "orthogonalized" | "orthogonal" | "cholesky" => Ok(Scheme::Orthogonalized),
            "generalized" => Ok(Scheme::Generalized),
            "clustered" => Ok(Scheme::Clustered),
            other => Err(Error::invalid(format!("unknown identification scheme `{other}`"))),
        }
    }
}

/// Partition of N series into C named clusters plus a causal ordering of the clusters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterSpec {
    names: Vec<String>,
    assignment: Vec<usize>,
    order: Vec<usize>,
}

impl ClusterSpec {
    /// `assignment[i]` is the cluster index of series `i`; `order` defaults to `0..C`.
    pub fn new(names: Vec<String>, assignment: Vec<usize>, order: Option<Vec<usize>>) -> Result<Self> {
        let c = names.len();
        if c == 0 {
            return Err(Error::invalid("at least one cluster is required"));
        }
        let mut sizes = vec![0usize; c];
        for (i, &a) in assignment.iter().enumerate() {
            if a >= c {
                return Err(Error::invalid(format!("series {i} assigned to unknown cluster {a}")));
            }
            sizes[a] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&k| k == 0) {
            return Err(Error::invalid(format!("cluster `{}` has no members", names[empty])));
        }
        let order = order.unwrap_or_else(|| (0..c).collect());
        let mut seen = vec![false; c];
        if order.len() != c {
            return Err(Error::invalid("cluster order must list every cluster exactly once"));
        }
        for &k in &order {
            if k >= c || std::mem::replace(&mut seen[k], true) {
                return Err(Error::invalid("cluster order must list every cluster exactly once"));
            }
        }
        Ok(Self {
            names,
            assignment,
            order,
        })
    }

    /// Builds a spec from series labels and named label groups.
    pub fn from_groups(labels: &[String], groups: &[(String, Vec<String>)], order: Option<&[String]>) -> Result<Self> {
        let mut assignment = vec![usize::MAX; labels.len()];
        for (c, (name, members)) in groups.iter().enumerate() {
            for m in members {
                let i = labels
                    .iter()
                    .position(|l| l == m)
                    .ok_or_else(|| Error::invalid(format!("cluster `{name}` lists unknown series `{m}`")))?;
                if assignment[i] != usize::MAX {
                    return Err(Error::invalid(format!(
                        "series `{m}` is assigned to more than one cluster"
                    )));
                }
                assignment[i] = c;
            }
        }
        if let Some(i) = assignment.iter().position(|&a| a == usize::MAX) {
            return Err(Error::invalid(format!(
                "series `{}` is not assigned to a cluster",
                labels[i]
            )));
        }
        let names: Vec<String> = groups.iter().map(|(n, _)| n.clone()).collect();
        let order = order
            .map(|o| {
                o.iter()
                    .map(|n| {
                        names
                            .iter()
                            .position(|x| x == n)
                            .ok_or_else(|| Error::invalid(format!("cluster order names unknown cluster `{n}`")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        Self::new(names, assignment, order)
    }

    /// One cluster holding every series.
    pub fn single(n: usize) -> Self {
        Self::new(vec!["all".into()], vec![0; n], None).expect("valid single cluster")
    }

    /// Every series in its own cluster, ordered by series index.
    pub fn singletons(n: usize) -> Self {
        Self::new((0..n).map(|i| format!("c{i}")).collect(), (0..n).collect(), None).expect("valid singleton clusters")
    }

    pub fn with_order(&self, order: Vec<usize>) -> Result<Self> {
        Self::new(self.names.clone(), self.assignment.clone(), Some(order))
    }

    pub fn n_series(&self) -> usize {
        self.assignment.len()
    }

    pub fn n_clusters(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn cluster_of(&self, series: usize) -> usize {
        self.assignment[series]
    }

    /// Series indices in cluster `c`, ascending.
    pub fn members(&self, c: usize) -> Vec<usize> {
        (0..self.n_series()).filter(|&i| self.assignment[i] == c).collect()
    }

    pub fn size(&self, c: usize) -> usize {
        self.assignment.iter().filter(|&&a| a == c).count()
    }

    /// Series indices grouped by cluster, clusters in causal order.
    pub fn ordered_series(&self) -> Vec<usize> {
        self.order.iter().flat_map(|&c| self.members(c)).collect()
    }
}

/// Moving-average matrices `A_0 … A_{H−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaCoefficients {
    matrices: Vec<Array2<f64>>,
}

impl MaCoefficients {
    pub fn from_model(model: &VarModel, horizon: usize) -> Result<Self> {
        ma_coefficients(&model.phi, horizon)
    }

    pub fn horizon(&self) -> usize {
        self.matrices.len()
    }

    pub fn n_series(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn get(&self, h: usize) -> &Array2<f64> {
        &self.matrices[h]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Array2<f64>> {
        self.matrices.iter()
    }
}

/// `A_0 = I`, `A_i = Σ_p Φ_p A_{i−p}` for `i = 1 … H−1`.
pub fn ma_coefficients(phi: &[Array2<f64>], horizon: usize) -> Result<MaCoefficients> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let Some(first) = phi.first() else {
        return Err(Error::invalid("at least one lag matrix is required"));
    };
    let n = first.nrows();
    if phi.iter().any(|p| p.dim() != (n, n)) {
        return Err(Error::dim("lag matrices must all be square and of equal size"));
    }
    let mut matrices: Vec<Array2<f64>> = Vec::with_capacity(horizon);
    matrices.push(Array2::eye(n));
    for i in 1..horizon {
        let mut a = Array2::zeros((n, n));
        for (p, phi_p) in phi.iter().enumerate() {
            if let Some(prev) = i.checked_sub(p + 1) {
                a += &phi_p.dot(&matrices[prev]);
            }
        }
        matrices.push(a);
    }
    Ok(MaCoefficients { matrices })
}

/// Lower-triangular `M` with `M Mᵀ = Σ` (after jitter, if any was needed).
pub fn cholesky_factor(sigma: ArrayView2<f64>) -> Result<Array2<f64>> {
    linalg::cholesky_jittered(sigma).map(|c| c.factor)
}

/// Blocks of the inverse of a 2×2-partitioned symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockInverse {
    pub inv11: Array2<f64>,
    pub inv12: Array2<f64>,
    pub inv21: Array2<f64>,
    pub inv22: Array2<f64>,
    /// `K = (Σ₂₂ − Σ₂₁ Σ₁₁⁻¹ Σ₁₂)⁻¹`, the inverse Schur complement.
    pub schur_inv: Array2<f64>,
}

/// Partitioned inverse via the Schur complement of `Σ₁₁`.
pub fn block_inverse_2x2(
    s11: ArrayView2<f64>,
    s12: ArrayView2<f64>,
    s21: ArrayView2<f64>,
    s22: ArrayView2<f64>,
) -> Result<BlockInverse> {
    let (n1, n2) = (s11.nrows(), s22.nrows());
    if s11.ncols() != n1 || s22.ncols() != n2 || s12.dim() != (n1, n2) || s21.dim() != (n2, n1) {
        return Err(Error::dim("inconsistent block shapes"));
    }
    let s11_inv = linalg::spd_inverse(s11).map_err(|_| Error::SingularBlock { block: "Σ11" })?;
    let s21_s11inv = s21.dot(&s11_inv);
    let schur = &s22 - &s21_s11inv.dot(&s12);
    let k = linalg::spd_inverse(linalg::symmetrize(schur.view()).view()).map_err(|_| Error::SingularBlock {
        block: "Schur complement",
    })?;
    let s11inv_s12 = s11_inv.dot(&s12);
    let inv12 = -s11inv_s12.dot(&k);
    let inv21 = -k.dot(&s21_s11inv);
    let inv11 = &s11_inv + &s11inv_s12.dot(&k).dot(&s21_s11inv);
    Ok(BlockInverse {
        inv11,
        inv12,
        inv21,
        inv22: k.clone(),
        schur_inv: k,
    })
}

/// An identification transform.
#[derive(Debug, Clone, PartialEq)]
pub struct Identification {
    pub scheme: Scheme,
    pub q: Array2<f64>,
    pub q_inv: Array2<f64>,
    pub omega: Array2<f64>,
    /// The reduced-form covariance actually decomposed (input plus any jitter).
    pub sigma: Array2<f64>,
    pub cluster: Option<ClusterSpec>,
    /// Diagonal ridge added to make `Σ` positive definite; zero if none.
    pub jitter: f64,
}

/// Clustered identification for an arbitrary number of clusters.
///
/// Works in the cluster-ordered basis: block row `r` of `Q⁻¹` is
/// `[−Σ_{r,<r} Σ_{<r,<r}⁻¹, I, 0]`, the joint projection of cluster `r` on all
/// earlier clusters. `Q` is obtained from `Q⁻¹` by forward substitution.
pub fn clusterizer(sigma: ArrayView2<f64>, spec: &ClusterSpec) -> Result<Identification> {
    let n = sigma.nrows();
    if sigma.ncols() != n || spec.n_series() != n {
        return Err(Error::dim(format!(
            "covariance is {}x{} but the cluster spec covers {} series",
            sigma.nrows(),
            sigma.ncols(),
            spec.n_series()
        )));
    }
    let chol = linalg::cholesky_jittered(sigma)?;
    let mut sig = linalg::symmetrize(sigma);
    sig.diag_mut().mapv_inplace(|d| d + chol.jitter);

    let perm = spec.ordered_series();
    let sp = permute(sig.view(), &perm);
    let mut bounds = vec![0usize];
    for &c in spec.order() {
        bounds.push(bounds.last().unwrap() + spec.size(c));
    }

    let mut qinv = Array2::<f64>::eye(n);
    for r in 1..spec.n_clusters() {
        let (lo, hi) = (bounds[r], bounds[r + 1]);
        let s_ee = sp.slice(s![..lo, ..lo]);
        let s_er = sp.slice(s![..lo, lo..hi]);
        let l = linalg::cholesky(s_ee)?;
        // Rows of the projection coefficient, transposed: Σ_{<r,<r}⁻¹ Σ_{<r,r}.
        let coef_t = linalg::cholesky_solve(l.view(), s_er);
        qinv.slice_mut(s![lo..hi, ..lo]).assign(&coef_t.t().mapv(|v| -v));
    }
    let omega_p = linalg::symmetrize(qinv.dot(&sp).dot(&qinv.t()).view());
    let q_p = linalg::unit_lower_inverse(qinv.view());

    Ok(Identification {
        scheme: Scheme::Clustered,
        q: unpermute(q_p.view(), &perm),
        q_inv: unpermute(qinv.view(), &perm),
        omega: unpermute(omega_p.view(), &perm),
        sigma: sig,
        cluster: Some(spec.clone()),
        jitter: chol.jitter,
    })
}

pub fn make_identification(
    sigma: ArrayView2<f64>,
    scheme: Scheme,
    spec: Option<&ClusterSpec>,
) -> Result<Identification> {
    let n = sigma.nrows();
    if sigma.ncols() != n {
        return Err(Error::dim("covariance must be square"));
    }
    match scheme {
        Scheme::Orthogonalized => {
            let chol = linalg::cholesky_jittered(sigma)?;
            let mut sig = linalg::symmetrize(sigma);
            sig.diag_mut().mapv_inplace(|d| d + chol.jitter);
            let q_inv = linalg::solve_lower(chol.factor.view(), Array2::eye(n).view());
            Ok(Identification {
                scheme,
                q: chol.factor,
                q_inv,
                omega: Array2::eye(n),
                sigma: sig,
                cluster: None,
                jitter: chol.jitter,
            })
        }
        Scheme::Generalized => Ok(Identification {
            scheme,
            q: Array2::eye(n),
            q_inv: Array2::eye(n),
            omega: sigma.to_owned(),
            sigma: sigma.to_owned(),
            cluster: None,
            jitter: 0.0,
        }),
        Scheme::Clustered => {
            let spec = spec.ok_or_else(|| Error::invalid("clustered identification needs a cluster spec"))?;
            clusterizer(sigma, spec)
        }
    }
}

/// `out[a, b] = m[perm[a], perm[b]]`.
fn permute(m: ArrayView2<f64>, perm: &[usize]) -> Array2<f64> {
    let n = perm.len();
    Array2::from_shape_fn((n, n), |(a, b)| m[[perm[a], perm[b]]])
}

fn unpermute(m: ArrayView2<f64>, perm: &[usize]) -> Array2<f64> {
    let n = perm.len();
    let mut out = Array2::zeros((n, n));
    for a in 0..n {
        for b in 0..n {
            out[[perm[a], perm[b]]] = m[[a, b]];
        }
    }
    out
}
