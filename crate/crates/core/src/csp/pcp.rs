use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::CspError;

/// Upper bound on colliding label pairs visited by the smoothness check.
const SMOOTHNESS_PAIR_CAP: u128 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PcpLayer {
    pub num_vars: usize,
    pub label_size: usize,
}

/// Projection constraint π_{v→u} from variable `v` of `layer` to variable
/// `u` of `target_layer` (layer < target_layer).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PcpConstraint {
    pub layer: usize,
    pub target_layer: usize,
    pub v: usize,
    pub u: usize,
    pub proj: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoothParams {
    pub d: usize,
    pub t: usize,
}

#[derive(Serialize, Deserialize)]
struct PcpJson {
    layers: Vec<PcpLayer>,
    constraints: Vec<PcpConstraint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    smooth: Option<SmoothParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    planted: Option<Vec<Vec<u32>>>,
}

/// Layered label cover. Layers and variables are 0-based; labels of layer l
/// are 0..label_size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PcpJson", into = "PcpJson")]
pub struct LayeredPcp {
    layers: Vec<PcpLayer>,
    constraints: Vec<PcpConstraint>,
    smooth: Option<SmoothParams>,
    planted: Option<Vec<Vec<u32>>>,
    pair_index: BTreeMap<(usize, usize), Vec<usize>>,
}

impl TryFrom<PcpJson> for LayeredPcp {
    type Error = CspError;

    fn try_from(j: PcpJson) -> Result<Self, CspError> {
        let pcp = LayeredPcp::new(j.layers, j.constraints, j.smooth)?;
        match j.planted {
            Some(p) => pcp.with_planted(p),
            None => Ok(pcp),
        }
    }
}

impl From<LayeredPcp> for PcpJson {
    fn from(p: LayeredPcp) -> Self {
        PcpJson {
            layers: p.layers,
            constraints: p.constraints,
            smooth: p.smooth,
            planted: p.planted,
        }
    }
}

/// Per layer pair: the worst colliding label pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LayerPairSmoothness {
    pub layer: usize,
    pub target_layer: usize,
    pub max_collisions: usize,
    pub degree: usize,
    pub value: f64,
    /// (v, i, j) attaining the maximum, if any pair collides.
    pub witness: Option<(usize, u32, u32)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothnessReport {
    pub t: usize,
    pub max: f64,
    pub exceeds: bool,
    pub per_pair: Vec<LayerPairSmoothness>,
    /// (layer, variable, target layer) with no neighbor in the target layer.
    pub isolated: Vec<(usize, usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LayerPairDensity {
    pub layer_a: usize,
    pub layer_b: usize,
    pub induced: usize,
    pub total: usize,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakDensityReport {
    pub delta: f64,
    pub threshold: f64,
    /// At least ⌈2/δ⌉ layers supplied, each set of relative size ≥ δ.
    pub hypothesis_met: bool,
    pub pairs: Vec<LayerPairDensity>,
    pub best: Option<LayerPairDensity>,
    pub meets_bound: bool,
    /// The hypothesis holds and yet no pair reaches δ²/4.
    pub guarantee_violated: bool,
}

impl LayeredPcp {
    pub fn new(
        layers: Vec<PcpLayer>,
        constraints: Vec<PcpConstraint>,
        smooth: Option<SmoothParams>,
    ) -> Result<Self, CspError> {
        if layers.is_empty() {
            return Err(CspError::Invalid("no layers".into()));
        }
        if let Some(l) = layers.iter().position(|l| l.label_size == 0) {
            return Err(CspError::Invalid(format!(
                "layer {l} has an empty label set"
            )));
        }
        let mut pair_index: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (idx, c) in constraints.iter().enumerate() {
            if c.layer >= c.target_layer || c.target_layer >= layers.len() {
                return Err(CspError::Invalid(format!(
                    "constraint {idx} has bad layers"
                )));
            }
            let (src, dst) = (layers[c.layer], layers[c.target_layer]);
            if c.v >= src.num_vars || c.u >= dst.num_vars {
                return Err(CspError::Invalid(format!(
                    "constraint {idx} endpoint out of range"
                )));
            }
            if c.proj.len() != src.label_size {
                return Err(CspError::Invalid(format!(
                    "constraint {idx} projection has {} entries, expected {}",
                    c.proj.len(),
                    src.label_size
                )));
            }
            if c.proj.iter().any(|&a| a as usize >= dst.label_size) {
                return Err(CspError::Invalid(format!(
                    "constraint {idx} maps outside R_target"
                )));
            }
            if let Some(sp) = smooth {
                let want = (sp.d as u128).pow((c.target_layer - c.layer) as u32);
                let mut counts = vec![0u128; dst.label_size];
                for &a in &c.proj {
                    counts[a as usize] += 1;
                }
                if counts.iter().any(|&n| n != want) {
                    return Err(CspError::Invalid(format!(
                        "constraint {idx} preimages are not of size {want}"
                    )));
                }
            }
            pair_index
                .entry((c.layer, c.target_layer))
                .or_default()
                .push(idx);
        }
        Ok(Self {
            layers,
            constraints,
            smooth,
            planted: None,
            pair_index,
        })
    }

    pub fn with_planted(mut self, labeling: Vec<Vec<u32>>) -> Result<Self, CspError> {
        self.check_full_labeling(&labeling)?;
        self.check_satisfies(&labeling)?;
        self.planted = Some(labeling);
        Ok(self)
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[PcpLayer] {
        &self.layers
    }

    pub fn constraints(&self) -> &[PcpConstraint] {
        &self.constraints
    }

    pub fn smooth(&self) -> Option<SmoothParams> {
        self.smooth
    }

    pub fn planted(&self) -> Option<&[Vec<u32>]> {
        self.planted.as_deref()
    }

    /// Indices of constraints in Φ_{l,l′}.
    pub fn constraints_between(&self, layer: usize, target: usize) -> &[usize] {
        self.pair_index
            .get(&(layer, target))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Layer pairs that carry at least one constraint.
    pub fn layer_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pair_index.keys().copied()
    }

    fn check_full_labeling(&self, labeling: &[Vec<u32>]) -> Result<(), CspError> {
        if labeling.len() != self.layers.len() {
            return Err(CspError::Invalid(
                "labeling has the wrong number of layers".into(),
            ));
        }
        for (l, (labels, layer)) in labeling.iter().zip(&self.layers).enumerate() {
            if labels.len() != layer.num_vars {
                return Err(CspError::MissingLabel {
                    layer: l,
                    var: labels.len().min(layer.num_vars),
                });
            }
            if let Some(&bad) = labels.iter().find(|&&a| a as usize >= layer.label_size) {
                return Err(CspError::LabelOutOfRange {
                    layer: l,
                    label: bad,
                });
            }
        }
        Ok(())
    }

    /// Error naming the first violated constraint, if any.
    pub fn check_satisfies(&self, labeling: &[Vec<u32>]) -> Result<(), CspError> {
        self.check_full_labeling(labeling)?;
        match self
            .constraints
            .iter()
            .position(|c| c.proj[labeling[c.layer][c.v] as usize] != labeling[c.target_layer][c.u])
        {
            Some(i) => Err(CspError::Unsatisfied(i)),
            None => Ok(()),
        }
    }

    /// Exact satisfied fraction for every layer pair carrying constraints.
    /// Unlabeled variables are allowed only if they are unconstrained.
    pub fn evaluate_labeling(
        &self,
        labeling: &[Vec<Option<u32>>],
    ) -> Result<BTreeMap<(usize, usize), Ratio<u64>>, CspError> {
        if labeling.len() != self.layers.len() {
            return Err(CspError::Invalid(
                "labeling has the wrong number of layers".into(),
            ));
        }
        let label = |layer: usize, var: usize| -> Result<u32, CspError> {
            let a = labeling[layer]
                .get(var)
                .copied()
                .flatten()
                .ok_or(CspError::MissingLabel { layer, var })?;
            if a as usize >= self.layers[layer].label_size {
                return Err(CspError::LabelOutOfRange { layer, label: a });
            }
            Ok(a)
        };
        let mut out = BTreeMap::new();
        for (&pair, ids) in &self.pair_index {
            let mut sat = 0u64;
            for &i in ids {
                let c = &self.constraints[i];
                if c.proj[label(c.layer, c.v)? as usize] == label(c.target_layer, c.u)? {
                    sat += 1;
                }
            }
            out.insert(pair, Ratio::new(sat, ids.len() as u64));
        }
        Ok(out)
    }

    /// Smoothness: for each layer pair, the largest fraction of a variable's
    /// neighbors under which two distinct labels collide.
    pub fn check_smoothness(&self) -> Result<SmoothnessReport, CspError> {
        let sp = self.smooth.ok_or(CspError::NotSmooth)?;
        let mut by_source: HashMap<(usize, usize, usize), Vec<usize>> = HashMap::new();
        for (i, c) in self.constraints.iter().enumerate() {
            by_source
                .entry((c.layer, c.v, c.target_layer))
                .or_default()
                .push(i);
        }
        let mut budget: u128 = 0;
        let mut per_pair = Vec::new();
        let mut isolated = Vec::new();
        let l_count = self.layers.len();
        for l in 0..l_count {
            for l2 in l + 1..l_count {
                if self.constraints_between(l, l2).is_empty() {
                    continue;
                }
                let mut best = LayerPairSmoothness {
                    layer: l,
                    target_layer: l2,
                    max_collisions: 0,
                    degree: 1,
                    value: 0.0,
                    witness: None,
                };
                for v in 0..self.layers[l].num_vars {
                    let Some(ids) = by_source.get(&(l, v, l2)) else {
                        isolated.push((l, v, l2));
                        continue;
                    };
                    let mut counts: HashMap<(u32, u32), usize> = HashMap::new();
                    for &ci in ids {
                        let c = &self.constraints[ci];
                        let mut buckets = vec![Vec::new(); self.layers[l2].label_size];
                        for (a, &b) in c.proj.iter().enumerate() {
                            buckets[b as usize].push(a as u32);
                        }
                        for bucket in &buckets {
                            let n = bucket.len() as u128;
                            budget += n * n.saturating_sub(1) / 2;
                            if budget > SMOOTHNESS_PAIR_CAP {
                                return Err(CspError::CapExceeded {
                                    what: "colliding label pairs",
                                    size: budget,
                                    cap: SMOOTHNESS_PAIR_CAP,
                                });
                            }
                            for x in 0..bucket.len() {
                                for y in x + 1..bucket.len() {
                                    *counts.entry((bucket[x], bucket[y])).or_default() += 1;
                                }
                            }
                        }
                    }
                    let deg = ids.len();
                    if let Some((&(i, j), &cnt)) = counts
                        .iter()
                        .max_by_key(|(&k, &c)| (c, std::cmp::Reverse(k)))
                    {
                        let value = cnt as f64 / deg as f64;
                        if value > best.value {
                            best = LayerPairSmoothness {
                                layer: l,
                                target_layer: l2,
                                max_collisions: cnt,
                                degree: deg,
                                value,
                                witness: Some((v, i, j)),
                            };
                        }
                    }
                }
                per_pair.push(best);
            }
        }
        let max = per_pair.iter().map(|p| p.value).fold(0.0, f64::max);
        Ok(SmoothnessReport {
            t: sp.t,
            max,
            exceeds: per_pair.iter().any(|p| p.max_collisions * sp.t > p.degree),
            per_pair,
            isolated,
        })
    }

    /// Weak density on the supplied (layer, variable subset) choices.
    pub fn check_weak_density(
        &self,
        sets: &[(usize, Vec<usize>)],
        delta: f64,
    ) -> Result<WeakDensityReport, CspError> {
        let mut members: BTreeMap<usize, Vec<bool>> = BTreeMap::new();
        let mut hypothesis_met = sets.len() as f64 >= (2.0 / delta).ceil();
        for (layer, vars) in sets {
            if *layer >= self.layers.len() {
                return Err(CspError::Invalid(format!("layer {layer} out of range")));
            }
            if vars.is_empty() {
                return Err(CspError::EmptySet(*layer));
            }
            let n = self.layers[*layer].num_vars;
            let mut mask = vec![false; n];
            for &v in vars {
                if v >= n {
                    return Err(CspError::Invalid(format!("variable {v} out of range")));
                }
                mask[v] = true;
            }
            let size = mask.iter().filter(|&&b| b).count();
            if (size as f64) < delta * n as f64 {
                hypothesis_met = false;
            }
            if members.insert(*layer, mask).is_some() {
                return Err(CspError::Invalid(format!("layer {layer} supplied twice")));
            }
        }
        let mut pairs = Vec::new();
        let layers: Vec<usize> = members.keys().copied().collect();
        for (a_i, &a) in layers.iter().enumerate() {
            for &b in &layers[a_i + 1..] {
                let ids = self.constraints_between(a, b);
                if ids.is_empty() {
                    continue;
                }
                let (ma, mb) = (&members[&a], &members[&b]);
                let induced = ids
                    .iter()
                    .filter(|&&i| ma[self.constraints[i].v] && mb[self.constraints[i].u])
                    .count();
                pairs.push(LayerPairDensity {
                    layer_a: a,
                    layer_b: b,
                    induced,
                    total: ids.len(),
                    fraction: induced as f64 / ids.len() as f64,
                });
            }
        }
        let best = pairs
            .iter()
            .cloned()
            .fold(None::<LayerPairDensity>, |acc, p| match acc {
                Some(b) if b.fraction >= p.fraction => Some(b),
                _ => Some(p),
            });
        let threshold = delta * delta / 4.0;
        let meets_bound = best.as_ref().is_some_and(|b| b.fraction >= threshold);
        Ok(WeakDensityReport {
            delta,
            threshold,
            hypothesis_met,
            pairs,
            best,
            meets_bound,
            guarantee_violated: hypothesis_met && !meets_bound,
        })
    }

    /// Plain layered PCP with a planted labeling: each variable gets
    /// `degree` random neighbors in every later layer and each projection is
    /// a random map sending the planted label to the planted label.
    pub fn planted_toy(
        layer_sizes: &[usize],
        label_sizes: &[usize],
        degree: usize,
        rng: &mut impl Rng,
    ) -> Result<Self, CspError> {
        if layer_sizes.len() != label_sizes.len() {
            return Err(CspError::Invalid(
                "layer and label size lists differ".into(),
            ));
        }
        let layers: Vec<PcpLayer> = layer_sizes
            .iter()
            .zip(label_sizes)
            .map(|(&num_vars, &label_size)| PcpLayer {
                num_vars,
                label_size,
            })
            .collect();
        let sigma = random_labeling(&layers, rng);
        let constraints = random_edges(&layers, degree, rng, |l, l2, v, u, rng| {
            let target = layers[l2].label_size as u32;
            let mut proj: Vec<u32> = (0..layers[l].label_size)
                .map(|_| rng.random_range(0..target))
                .collect();
            proj[sigma[l][v] as usize] = sigma[l2][u];
            proj
        });
        Self::new(layers, constraints, None)?.with_planted(sigma)
    }

    /// Smooth-format d-to-1 layered PCP with |R_l| = top·d^{L−1−l} and a
    /// planted labeling. Projections are uniformly random d^{l′−l}-to-1
    /// maps adjusted to agree with the planted labels.
    pub fn planted_dto1_toy(
        layer_sizes: &[usize],
        top_label_size: usize,
        d: usize,
        degree: usize,
        t: usize,
        rng: &mut impl Rng,
    ) -> Result<Self, CspError> {
        let l_count = layer_sizes.len();
        let layers: Vec<PcpLayer> = layer_sizes
            .iter()
            .enumerate()
            .map(|(l, &num_vars)| PcpLayer {
                num_vars,
                label_size: top_label_size * d.pow((l_count - 1 - l) as u32),
            })
            .collect();
        let sigma = random_labeling(&layers, rng);
        let constraints = random_edges(&layers, degree, rng, |l, l2, v, u, rng| {
            let group = d.pow((l2 - l) as u32);
            let mut target: Vec<u32> = (0..layers[l2].label_size as u32).collect();
            target.shuffle(rng);
            let mut proj: Vec<u32> = (0..layers[l].label_size)
                .map(|a| target[a / group])
                .collect();
            proj.shuffle(rng);
            let a = sigma[l][v] as usize;
            let swap = proj.iter().position(|&b| b == sigma[l2][u]).unwrap();
            proj.swap(swap, a);
            proj
        });
        Self::new(layers, constraints, Some(SmoothParams { d, t }))?.with_planted(sigma)
    }
}

fn random_labeling(layers: &[PcpLayer], rng: &mut impl Rng) -> Vec<Vec<u32>> {
    layers
        .iter()
        .map(|l| {
            (0..l.num_vars)
                .map(|_| rng.random_range(0..l.label_size as u32))
                .collect()
        })
        .collect()
}

fn random_edges<R: Rng>(
    layers: &[PcpLayer],
    degree: usize,
    rng: &mut R,
    mut proj: impl FnMut(usize, usize, usize, usize, &mut R) -> Vec<u32>,
) -> Vec<PcpConstraint> {
    let mut out = Vec::new();
    for l in 0..layers.len() {
        for l2 in l + 1..layers.len() {
            for v in 0..layers[l].num_vars {
                let n2 = layers[l2].num_vars;
                let mut us = index::sample(rng, n2, degree.min(n2)).into_vec();
                us.sort_unstable();
                for u in us {
                    let p = proj(l, l2, v, u, rng);
                    out.push(PcpConstraint {
                        layer: l,
                        target_layer: l2,
                        v,
                        u,
                        proj: p,
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stage_rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn one_constraint(proj: Vec<u32>, target: usize, smooth: Option<SmoothParams>) -> LayeredPcp {
        LayeredPcp::new(
            vec![
                PcpLayer {
                    num_vars: 1,
                    label_size: proj.len(),
                },
                PcpLayer {
                    num_vars: 1,
                    label_size: target,
                },
            ],
            vec![PcpConstraint {
                layer: 0,
                target_layer: 1,
                v: 0,
                u: 0,
                proj,
            }],
            smooth,
        )
        .unwrap()
    }

    #[test]
    fn smoothness_examples() {
        let injective = one_constraint(vec![2, 0, 1], 3, Some(SmoothParams { d: 1, t: 4 }));
        let rep = injective.check_smoothness().unwrap();
        assert_eq!(rep.max, 0.0);
        assert!(!rep.exceeds);

        let colliding = one_constraint(vec![0, 0, 1, 1], 2, Some(SmoothParams { d: 2, t: 2 }));
        let rep = colliding.check_smoothness().unwrap();
        assert_eq!(rep.max, 1.0);
        assert!(rep.exceeds);
        assert_eq!(rep.per_pair[0].witness, Some((0, 0, 1)));

        assert_eq!(
            one_constraint(vec![0], 1, None).check_smoothness(),
            Err(CspError::NotSmooth)
        );
    }

    #[test]
    fn isolated_variables_reported() {
        let pcp = LayeredPcp::new(
            vec![
                PcpLayer {
                    num_vars: 2,
                    label_size: 2,
                },
                PcpLayer {
                    num_vars: 1,
                    label_size: 2,
                },
            ],
            vec![PcpConstraint {
                layer: 0,
                target_layer: 1,
                v: 0,
                u: 0,
                proj: vec![1, 0],
            }],
            Some(SmoothParams { d: 1, t: 1 }),
        )
        .unwrap();
        assert_eq!(pcp.check_smoothness().unwrap().isolated, vec![(0, 1, 1)]);
    }

    #[test]
    fn preimage_law_enforced() {
        let bad = LayeredPcp::new(
            vec![
                PcpLayer {
                    num_vars: 1,
                    label_size: 4,
                },
                PcpLayer {
                    num_vars: 1,
                    label_size: 2,
                },
            ],
            vec![PcpConstraint {
                layer: 0,
                target_layer: 1,
                v: 0,
                u: 0,
                proj: vec![0, 0, 0, 1],
            }],
            Some(SmoothParams { d: 2, t: 1 }),
        );
        assert!(bad.is_err());
    }

    #[test]
    fn weak_density_examples() {
        let mut rng = stage_rng(2, "wd");
        let pcp = LayeredPcp::planted_toy(&[4, 4, 4, 4], &[2, 2, 2, 2], 2, &mut rng).unwrap();
        let full: Vec<(usize, Vec<usize>)> = (0..4).map(|l| (l, (0..4).collect())).collect();
        let rep = pcp.check_weak_density(&full, 0.5).unwrap();
        assert!(rep.pairs.iter().all(|p| p.fraction == 1.0));
        assert!(rep.hypothesis_met && rep.meets_bound);
        assert!(matches!(
            pcp.check_weak_density(&[(0, vec![])], 0.5),
            Err(CspError::EmptySet(0))
        ));

        let sparse = LayeredPcp::new(
            vec![
                PcpLayer {
                    num_vars: 2,
                    label_size: 1,
                },
                PcpLayer {
                    num_vars: 2,
                    label_size: 1,
                },
            ],
            vec![PcpConstraint {
                layer: 0,
                target_layer: 1,
                v: 0,
                u: 0,
                proj: vec![0],
            }],
            None,
        )
        .unwrap();
        let rep = sparse
            .check_weak_density(&[(0, vec![1]), (1, vec![1])], 1.0)
            .unwrap();
        assert_eq!(rep.best.unwrap().fraction, 0.0);
        assert!(!rep.hypothesis_met);
        assert!(!rep.guarantee_violated);
    }

    #[test]
    fn planted_labeling_satisfies_everything() {
        let mut rng = stage_rng(8, "pl");
        let pcp = LayeredPcp::planted_dto1_toy(&[3, 3, 3], 2, 2, 2, 1, &mut rng).unwrap();
        assert_eq!(pcp.layers()[0].label_size, 8);
        let labeling: Vec<Vec<Option<u32>>> = pcp
            .planted()
            .unwrap()
            .iter()
            .map(|l| l.iter().map(|&a| Some(a)).collect())
            .collect();
        let fr = pcp.evaluate_labeling(&labeling).unwrap();
        assert_eq!(fr.len(), 3);
        assert!(fr.values().all(|f| *f == Ratio::from_integer(1)));

        let mut missing = labeling.clone();
        missing[0][0] = None;
        assert!(matches!(
            pcp.evaluate_labeling(&missing),
            Err(CspError::MissingLabel { .. })
        ));
    }

    #[test]
    fn pairs_without_constraints_absent() {
        let pcp = LayeredPcp::new(
            vec![
                PcpLayer {
                    num_vars: 1,
                    label_size: 2
                };
                3
            ],
            vec![PcpConstraint {
                layer: 0,
                target_layer: 2,
                v: 0,
                u: 0,
                proj: vec![0, 1],
            }],
            None,
        )
        .unwrap();
        let fr = pcp.evaluate_labeling(&vec![vec![Some(0)]; 3]).unwrap();
        assert_eq!(fr.keys().copied().collect::<Vec<_>>(), vec![(0, 2)]);
    }

    fn brute_fraction(pcp: &LayeredPcp, labeling: &[Vec<u32>], pair: (usize, usize)) -> Ratio<u64> {
        let mut sat = 0;
        let mut tot = 0;
        for c in pcp.constraints() {
            if (c.layer, c.target_layer) == pair {
                tot += 1;
                if c.proj[labeling[c.layer][c.v] as usize] == labeling[c.target_layer][c.u] {
                    sat += 1;
                }
            }
        }
        Ratio::new(sat, tot)
    }

    proptest! {
        #[test]
        fn relabeling_invariance(seed in any::<u64>()) {
            let mut rng = stage_rng(seed, "relabel");
            let pcp = LayeredPcp::planted_toy(&[3, 3, 2], &[3, 2, 2], 2, &mut rng).unwrap();
            let labeling: Vec<Vec<u32>> = pcp.layers().iter()
                .map(|l| (0..l.num_vars).map(|_| rng.random_range(0..l.label_size as u32)).collect())
                .collect();
            let perms: Vec<Vec<u32>> = pcp.layers().iter().map(|l| {
                let mut p: Vec<u32> = (0..l.label_size as u32).collect();
                p.shuffle(&mut rng);
                p
            }).collect();
            let constraints = pcp.constraints().iter().map(|c| {
                let mut proj = vec![0; c.proj.len()];
                for (a, &b) in c.proj.iter().enumerate() {
                    proj[perms[c.layer][a] as usize] = perms[c.target_layer][b as usize];
                }
                PcpConstraint { proj, ..c.clone() }
            }).collect();
            let permuted = LayeredPcp::new(pcp.layers().to_vec(), constraints, None).unwrap();
            let wrap = |lab: &Vec<Vec<u32>>| -> Vec<Vec<Option<u32>>> {
                lab.iter().map(|l| l.iter().map(|&a| Some(a)).collect()).collect()
            };
            let relabeled: Vec<Vec<u32>> = labeling.iter().enumerate()
                .map(|(l, lab)| lab.iter().map(|&a| perms[l][a as usize]).collect())
                .collect();
            let a = pcp.evaluate_labeling(&wrap(&labeling)).unwrap();
            let b = permuted.evaluate_labeling(&wrap(&relabeled)).unwrap();
            prop_assert_eq!(&a, &b);
            for (&pair, &f) in &a {
                prop_assert_eq!(f, brute_fraction(&pcp, &labeling, pair));
            }
        }
    }
}
