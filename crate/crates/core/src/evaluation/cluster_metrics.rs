//! Homogeneity / completeness / V-measure via conditional entropies.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::ClusterMetrics;

/// Scores a clustering against ground truth.
///
/// `clusters` maps message → cluster label, `truth` maps message → event
/// label; the two maps must cover exactly the same non-empty message set.
/// With natural-log entropies:
/// `homogeneity = 1 − H(truth|cluster)/H(truth)` (1 when `H(truth) = 0`),
/// `completeness = 1 − H(cluster|truth)/H(cluster)` (1 when
/// `H(cluster) = 0`), and the V-measure is their harmonic mean.
pub fn cluster_metrics<K, C, E>(
    clusters: &BTreeMap<K, C>,
    truth: &BTreeMap<K, E>,
) -> Result<ClusterMetrics>
where
    K: Ord + std::fmt::Debug,
    C: Ord + Clone,
    E: Ord + Clone,
{
    if clusters.is_empty() {
        return Err(Error::InvalidInput(
            "cluster metrics need a non-empty message set".into(),
        ));
    }
    if clusters.len() != truth.len() || !clusters.keys().eq(truth.keys()) {
        return Err(Error::InvalidInput(
            "cluster and truth maps must cover the same message set".into(),
        ));
    }

    let n = clusters.len() as f64;
    let mut cluster_counts: BTreeMap<&C, usize> = BTreeMap::new();
    let mut truth_counts: BTreeMap<&E, usize> = BTreeMap::new();
    let mut joint_counts: BTreeMap<(&C, &E), usize> = BTreeMap::new();
    for (key, cluster) in clusters {
        let event = truth.get(key).expect("key sets match");
        *cluster_counts.entry(cluster).or_insert(0) += 1;
        *truth_counts.entry(event).or_insert(0) += 1;
        *joint_counts.entry((cluster, event)).or_insert(0) += 1;
    }

    fn entropy_of<L: Ord>(counts: &BTreeMap<L, usize>, n: f64) -> f64 {
        counts
            .values()
            .map(|&count| {
                let p = count as f64 / n;
                -p * p.ln()
            })
            .sum()
    }
    let h_truth = entropy_of(&truth_counts, n);
    let h_cluster = entropy_of(&cluster_counts, n);

    // H(truth | cluster) = -sum over joint cells of p(c,e) * ln(n_ce / n_c),
    // and the symmetric form for H(cluster | truth).
    let mut h_truth_given_cluster = 0.0;
    let mut h_cluster_given_truth = 0.0;
    for ((cluster, event), &count) in &joint_counts {
        let joint = count as f64;
        let p = joint / n;
        h_truth_given_cluster -= p * (joint / cluster_counts[cluster] as f64).ln();
        h_cluster_given_truth -= p * (joint / truth_counts[event] as f64).ln();
    }

    let homogeneity = if h_truth == 0.0 {
        1.0
    } else {
        1.0 - h_truth_given_cluster / h_truth
    };
    let completeness = if h_cluster == 0.0 {
        1.0
    } else {
        1.0 - h_cluster_given_truth / h_cluster
    };
    let v_measure = if homogeneity + completeness == 0.0 {
        0.0
    } else {
        2.0 * homogeneity * completeness / (homogeneity + completeness)
    };

    Ok(ClusterMetrics {
        homogeneity,
        completeness,
        v_measure,
    })
}
