use ndarray::Array2;
use serde::Serialize;

use super::VdMatrix;
use crate::error::{Error, Result};
use crate::identify::ClusterSpec;

/// Connectedness summaries of a normalized variance decomposition.
///
/// Percent-valued fields (`system_wide`, `within_cluster`, `cross_cluster`,
/// `to`, `from`, `net`, `regional_net`) are on a 0–100 scale; the cluster share
/// fields are fractions. Cluster-indexed vectors follow the cluster spec's
/// index order, not its causal order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectednessReport {
    pub system_wide: f64,
    pub within_cluster: f64,
    pub cross_cluster: f64,
    /// `100 Σ_{i≠j} θ_ij`, shocks from node `j` to everyone else.
    pub to: Vec<f64>,
    /// `100 Σ_{j≠i} θ_ij`, shocks received by node `i`.
    pub from: Vec<f64>,
    pub net: Vec<f64>,
    pub clusters: Vec<String>,
    /// `Θ_c^own`.
    pub own: Vec<f64>,
    /// `Θ_c^comove`.
    pub comove: Vec<f64>,
    /// `contagion_pairs[c][k] = Θ_{c←k}`, averaged over members of both clusters; zero on the diagonal.
    pub contagion_pairs: Vec<Vec<f64>>,
    /// Total contagion received by each cluster, `(1/N_c) Σ_{i∈c} Σ_{j∉c} θ_ij`.
    pub contagion: Vec<f64>,
    pub own_avg: f64,
    pub comove_avg: f64,
    pub contagion_avg: f64,
    /// Cross-region column sum minus cross-region row sum, per member, percent.
    pub regional_net: Vec<f64>,
}

pub fn measures(vd: &VdMatrix, spec: &ClusterSpec) -> Result<ConnectednessReport> {
    let theta: &Array2<f64> = &vd.theta;
    let n = theta.nrows();
    if spec.n_series() != n {
        return Err(Error::dim(format!(
            "decomposition covers {n} series but the cluster spec covers {}",
            spec.n_series()
        )));
    }
    let nf = n as f64;
    let c = spec.n_clusters();
    let cl = spec.assignment();

    let mut to = vec![0.0; n];
    let mut from = vec![0.0; n];
    let (mut within, mut cross) = (0.0, 0.0);
    let mut own = vec![0.0; c];
    let mut comove = vec![0.0; c];
    let mut contagion = vec![0.0; c];
    let mut block_sums = vec![vec![0.0; c]; c];
    // Cross-region mass leaving (columns) and entering (rows) each cluster.
    let mut out_cross = vec![0.0; c];
    let mut in_cross = vec![0.0; c];

    for i in 0..n {
        for j in 0..n {
            let v = theta[[i, j]];
            block_sums[cl[i]][cl[j]] += v;
            if i == j {
                own[cl[i]] += v;
                continue;
            }
            to[j] += v;
            from[i] += v;
            if cl[i] == cl[j] {
                within += v;
                comove[cl[i]] += v;
            } else {
                cross += v;
                contagion[cl[i]] += v;
                out_cross[cl[j]] += v;
                in_cross[cl[i]] += v;
            }
        }
    }

    let sizes: Vec<f64> = (0..c).map(|k| spec.size(k) as f64).collect();
    let mut contagion_pairs = vec![vec![0.0; c]; c];
    for a in 0..c {
        own[a] /= sizes[a];
        comove[a] /= sizes[a];
        contagion[a] /= sizes[a];
        for b in 0..c {
            if a != b {
                contagion_pairs[a][b] = block_sums[a][b] / (sizes[a] * sizes[b]);
            }
        }
    }
    let avg = |v: &[f64]| v.iter().sum::<f64>() / c as f64;
    let to: Vec<f64> = to.into_iter().map(|v| 100.0 * v).collect();
    let from: Vec<f64> = from.into_iter().map(|v| 100.0 * v).collect();
    let net = to.iter().zip(&from).map(|(t, f)| t - f).collect();
    let regional_net = (0..c)
        .map(|k| 100.0 * (out_cross[k] - in_cross[k]) / sizes[k])
        .collect();

    Ok(ConnectednessReport {
        system_wide: 100.0 * (within + cross) / nf,
        within_cluster: 100.0 * within / nf,
        cross_cluster: 100.0 * cross / nf,
        to,
        from,
        net,
        clusters: spec.names().to_vec(),
        own_avg: avg(&own),
        comove_avg: avg(&comove),
        contagion_avg: avg(&contagion),
        own,
        comove,
        contagion_pairs,
        contagion,
        regional_net,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connect::VdOrdering;
    use crate::identify::Scheme;

    fn vd_of(theta: Array2<f64>) -> VdMatrix {
        VdMatrix {
            theta_raw: theta.clone(),
            theta,
            horizon: 1,
            scheme: Scheme::Generalized,
            ordering: VdOrdering::Natural,
        }
    }

    fn two_by_two() -> ClusterSpec {
        ClusterSpec::new(vec!["A".into(), "B".into()], vec![0, 0, 1, 1], None).unwrap()
    }

    #[test]
    fn disconnected_network() {
        let r = measures(&vd_of(Array2::eye(4)), &two_by_two()).unwrap();
        assert_eq!(r.own_avg, 1.0);
        assert_eq!((r.comove_avg, r.contagion_avg, r.system_wide), (0.0, 0.0, 0.0));
        assert!(r.net.iter().chain(&r.regional_net).all(|&v| v == 0.0));
    }

    #[test]
    fn uniform_four_by_four_hand_sums() {
        let r = measures(&vd_of(Array2::from_elem((4, 4), 0.25)), &two_by_two()).unwrap();
        // own: (1/2)(1/4 + 1/4); comove: (1/2)(2 · 1/4); pair: (1/2)(1/2)(4 · 1/4).
        assert_eq!(r.own, vec![0.25, 0.25]);
        assert_eq!(r.comove, vec![0.25, 0.25]);
        assert_eq!(r.contagion_pairs, vec![vec![0.0, 0.25], vec![0.25, 0.0]]);
        // Received contagion: (1/2)(2 · 2 · 1/4) per cluster.
        assert_eq!(r.contagion, vec![0.5, 0.5]);
        assert_eq!(r.own_avg + r.comove_avg + r.contagion_avg, 1.0);
        // 12 off-diagonal cells of 0.25: 100·3/4; within has 4 of them.
        assert_eq!(r.system_wide, 75.0);
        assert_eq!(r.within_cluster, 25.0);
        assert_eq!(r.cross_cluster, 50.0);
        assert_eq!(r.to, vec![75.0; 4]);
        assert_eq!(r.net, vec![0.0; 4]);
        assert_eq!(r.regional_net, vec![0.0, 0.0]);
    }

    #[test]
    fn regional_net_direction() {
        // Node 0 (cluster A) explains half of nodes 2 and 3 (cluster B).
        let theta = ndarray::array![
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.5, 0.0, 0.5, 0.0],
            [0.5, 0.0, 0.0, 0.5],
        ];
        let r = measures(&vd_of(theta), &two_by_two()).unwrap();
        assert_eq!(r.regional_net, vec![50.0, -50.0]);
        assert_eq!(r.net, vec![100.0, 0.0, -50.0, -50.0]);
        assert_eq!(r.cross_cluster, 25.0);
    }

    #[test]
    fn size_mismatch() {
        assert!(measures(&vd_of(Array2::eye(3)), &two_by_two()).is_err());
    }
}
