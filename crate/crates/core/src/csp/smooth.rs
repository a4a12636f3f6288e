//! Layered smooth d-to-1 PCP built from a bi-regular d-to-1 game.
//!
//! A variable of layer l (0-based) is a set of TL + L − 1 − l V-variables
//! together with l U-variables of the game. Its label is a tuple of game
//! labels in member order (V-members ascending, then U-members ascending),
//! packed in mixed radix with the first member least significant.

use std::collections::HashMap;

use super::{CspError, Dto1Game, GameLabeling, LayeredPcp, PcpConstraint, PcpLayer, SmoothParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SmoothBuildCaps {
    pub max_labels: u128,
    pub max_vars_per_layer: u128,
    pub max_table_entries: u128,
}

impl Default for SmoothBuildCaps {
    fn default() -> Self {
        Self {
            max_labels: 1_000_000,
            max_vars_per_layer: 100_000,
            max_table_entries: 50_000_000,
        }
    }
}

/// Variable sets of every layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmoothLayout {
    pub num_layers: usize,
    pub t: usize,
    m: usize,
    k: usize,
    /// Per layer, per variable: (V-members, U-members), both ascending.
    pub members: Vec<Vec<(Vec<usize>, Vec<usize>)>>,
}

fn binom(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    rec(0, n, r, &mut cur, &mut out);
    out
}

enum Source {
    V(usize),
    U(usize),
    Project(usize, usize),
}

impl SmoothLayout {
    pub fn new(
        game: &Dto1Game,
        num_layers: usize,
        t: usize,
        caps: &SmoothBuildCaps,
    ) -> Result<Self, CspError> {
        if num_layers < 2 || t < 1 {
            return Err(CspError::Invalid("need L ≥ 2 and T ≥ 1".into()));
        }
        let mut members = Vec::with_capacity(num_layers);
        for l in 0..num_layers {
            let nv = t * num_layers + num_layers - 1 - l;
            let nu = l;
            let labels = (game.m() as u128)
                .checked_pow(nv as u32)
                .and_then(|x| x.checked_mul((game.k() as u128).checked_pow(nu as u32)?))
                .unwrap_or(u128::MAX);
            if labels > caps.max_labels {
                return Err(CspError::CapExceeded {
                    what: "labels per layer",
                    size: labels,
                    cap: caps.max_labels,
                });
            }
            let vars = binom(game.num_v(), nv) * binom(game.num_u(), nu);
            if vars > caps.max_vars_per_layer {
                return Err(CspError::CapExceeded {
                    what: "variables per layer",
                    size: vars,
                    cap: caps.max_vars_per_layer,
                });
            }
            if vars == 0 {
                return Err(CspError::Invalid(format!(
                    "layer {l} needs {nv} V-variables and {nu} U-variables"
                )));
            }
            let vs = combinations(game.num_v(), nv);
            let us = combinations(game.num_u(), nu);
            let layer: Vec<_> = vs
                .iter()
                .flat_map(|v| us.iter().map(move |u| (v.clone(), u.clone())))
                .collect();
            members.push(layer);
        }
        Ok(Self {
            num_layers,
            t,
            m: game.m(),
            k: game.k(),
            members,
        })
    }

    pub fn label_size(&self, layer: usize) -> usize {
        let (v, u) = &self.members[layer][0];
        self.m.pow(v.len() as u32) * self.k.pow(u.len() as u32)
    }

    fn encode(&self, v_digits: &[usize], u_digits: &[usize]) -> u32 {
        let mut acc = 0usize;
        for &d in u_digits.iter().rev() {
            acc = acc * self.k + d;
        }
        for &d in v_digits.iter().rev() {
            acc = acc * self.m + d;
        }
        acc as u32
    }

    fn decode(
        &self,
        mut label: usize,
        nv: usize,
        nu: usize,
        v_out: &mut Vec<usize>,
        u_out: &mut Vec<usize>,
    ) {
        v_out.clear();
        u_out.clear();
        for _ in 0..nv {
            v_out.push(label % self.m);
            label /= self.m;
        }
        for _ in 0..nu {
            u_out.push(label % self.k);
            label /= self.k;
        }
    }

    /// The layered labeling induced by a game labeling.
    pub fn lift_labeling(&self, labeling: &GameLabeling) -> Vec<Vec<u32>> {
        self.members
            .iter()
            .map(|layer| {
                layer
                    .iter()
                    .map(|(vs, us)| {
                        let vd: Vec<usize> = vs.iter().map(|&v| labeling.v_labels[v]).collect();
                        let ud: Vec<usize> = us.iter().map(|&u| labeling.u_labels[u]).collect();
                        self.encode(&vd, &ud)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Layer member (V-set, U-set) to its index within the layer.
type MemberIndex = HashMap<(Vec<usize>, Vec<usize>), usize>;

/// Build the smooth layered PCP with default caps.
pub fn build_smooth_mlpcp(
    game: &Dto1Game,
    num_layers: usize,
    t: usize,
) -> Result<LayeredPcp, CspError> {
    build_smooth_mlpcp_with(game, num_layers, t, &SmoothBuildCaps::default()).map(|(p, _)| p)
}

/// Build with explicit caps, also returning the variable layout.
pub fn build_smooth_mlpcp_with(
    game: &Dto1Game,
    num_layers: usize,
    t: usize,
    caps: &SmoothBuildCaps,
) -> Result<(LayeredPcp, SmoothLayout), CspError> {
    if !game.is_bi_regular() {
        return Err(CspError::NotBiRegular(
            "degree sequences are not constant".into(),
        ));
    }
    let layout = SmoothLayout::new(game, num_layers, t, caps)?;
    let mut neighbors: Vec<Vec<(usize, usize)>> = vec![Vec::new(); game.num_v()];
    for (ci, c) in game.constraints().iter().enumerate() {
        if neighbors[c.v].iter().any(|&(u, _)| u == c.u) {
            return Err(CspError::Invalid(format!(
                "game has two constraints between v{} and u{}",
                c.v, c.u
            )));
        }
        neighbors[c.v].push((c.u, ci));
    }
    let index: Vec<MemberIndex> = layout
        .members
        .iter()
        .map(|layer| {
            layer
                .iter()
                .cloned()
                .enumerate()
                .map(|(i, key)| (key, i))
                .collect()
        })
        .collect();

    let mut constraints = Vec::new();
    let mut table_entries: u128 = 0;
    let (mut vd, mut ud) = (Vec::new(), Vec::new());
    for l in 0..num_layers {
        let size = layout.label_size(l);
        for (v_idx, (vset, uset)) in layout.members[l].iter().enumerate() {
            for l2 in l + 1..num_layers {
                let delta = l2 - l;
                for q_pos in combinations(vset.len(), delta) {
                    let mut choice = vec![0usize; delta];
                    'matchings: loop {
                        let ps: Vec<(usize, usize)> = q_pos
                            .iter()
                            .zip(&choice)
                            .map(|(&qp, &c)| neighbors[vset[qp]][c])
                            .collect();
                        let mut p_only: Vec<usize> = ps.iter().map(|&(p, _)| p).collect();
                        p_only.sort_unstable();
                        let distinct = p_only.windows(2).all(|w| w[0] != w[1])
                            && p_only.iter().all(|p| !uset.contains(p));
                        if distinct {
                            let new_v: Vec<usize> = vset
                                .iter()
                                .enumerate()
                                .filter(|(i, _)| !q_pos.contains(i))
                                .map(|(_, &x)| x)
                                .collect();
                            let mut new_u = uset.clone();
                            new_u.extend(&p_only);
                            new_u.sort_unstable();
                            let u_idx =
                                *index[l2].get(&(new_v.clone(), new_u.clone())).ok_or_else(
                                    || CspError::Internal("target variable missing".into()),
                                )?;
                            let v_src: Vec<Source> = new_v
                                .iter()
                                .map(|x| Source::V(vset.iter().position(|y| y == x).unwrap()))
                                .collect();
                            let u_src: Vec<Source> = new_u
                                .iter()
                                .map(|x| match uset.iter().position(|y| y == x) {
                                    Some(i) => Source::U(i),
                                    None => {
                                        let r = ps.iter().position(|&(p, _)| p == *x).unwrap();
                                        Source::Project(q_pos[r], ps[r].1)
                                    }
                                })
                                .collect();
                            table_entries += size as u128;
                            if table_entries > caps.max_table_entries {
                                return Err(CspError::CapExceeded {
                                    what: "projection table entries",
                                    size: table_entries,
                                    cap: caps.max_table_entries,
                                });
                            }
                            let pick = |s: &Source, vd: &[usize], ud: &[usize]| match *s {
                                Source::V(i) => vd[i],
                                Source::U(i) => ud[i],
                                Source::Project(i, ci) => game.constraints()[ci].proj[vd[i]],
                            };
                            let mut proj = Vec::with_capacity(size);
                            for a in 0..size {
                                layout.decode(a, vset.len(), uset.len(), &mut vd, &mut ud);
                                let nvd: Vec<usize> =
                                    v_src.iter().map(|s| pick(s, &vd, &ud)).collect();
                                let nud: Vec<usize> =
                                    u_src.iter().map(|s| pick(s, &vd, &ud)).collect();
                                proj.push(layout.encode(&nvd, &nud));
                            }
                            constraints.push(PcpConstraint {
                                layer: l,
                                target_layer: l2,
                                v: v_idx,
                                u: u_idx,
                                proj,
                            });
                        }
                        // next matching in mixed radix over neighbor lists
                        let mut r = 0;
                        loop {
                            if r == delta {
                                break 'matchings;
                            }
                            choice[r] += 1;
                            if choice[r] < neighbors[vset[q_pos[r]]].len() {
                                break;
                            }
                            choice[r] = 0;
                            r += 1;
                        }
                    }
                }
            }
        }
    }
    let layers = (0..num_layers)
        .map(|l| PcpLayer {
            num_vars: layout.members[l].len(),
            label_size: layout.label_size(l),
        })
        .collect();
    let pcp = LayeredPcp::new(layers, constraints, Some(SmoothParams { d: game.d(), t }))?;
    let pcp = match game.planted() {
        Some(g) => pcp.with_planted(layout.lift_labeling(g))?,
        None => pcp,
    };
    Ok((pcp, layout))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stage_rng;

    fn toy_game(seed: u64) -> Dto1Game {
        Dto1Game::random(3, 6, 2, 2, 2, true, &mut stage_rng(seed, "game")).unwrap()
    }

    #[test]
    fn layer_shapes() {
        let g = toy_game(1);
        let (pcp, layout) = build_smooth_mlpcp_with(&g, 2, 1, &SmoothBuildCaps::default()).unwrap();
        assert_eq!(layout.members[0][0].0.len(), 3);
        assert_eq!(layout.members[0][0].1.len(), 0);
        assert_eq!(layout.members[1][0].0.len(), 2);
        assert_eq!(layout.members[1][0].1.len(), 1);
        assert_eq!(pcp.layers()[0].label_size, 4usize.pow(3));
        assert_eq!(pcp.layers()[1].label_size, 4 * 4 * 2);
        assert_eq!(pcp.layers()[0].num_vars, 20);
        assert_eq!(pcp.layers()[1].num_vars, 15 * 3);
        // each v: 3 choices of q, 2 game neighbors each
        assert_eq!(pcp.constraints().len(), 20 * 6);
    }

    #[test]
    fn planted_lifts_to_satisfying_labeling() {
        let g = toy_game(2);
        let pcp = build_smooth_mlpcp(&g, 2, 1).unwrap();
        assert!(pcp.planted().is_some());
        pcp.check_satisfies(pcp.planted().unwrap()).unwrap();
    }

    #[test]
    fn caps_and_regularity() {
        let g = toy_game(3);
        let tiny = SmoothBuildCaps {
            max_labels: 10,
            ..Default::default()
        };
        assert!(matches!(
            build_smooth_mlpcp_with(&g, 2, 1, &tiny),
            Err(CspError::CapExceeded { .. })
        ));
        let mut cs = g.constraints().to_vec();
        cs.pop();
        let irregular = Dto1Game::new(3, 6, 2, 2, cs).unwrap();
        assert!(matches!(
            build_smooth_mlpcp(&irregular, 2, 1),
            Err(CspError::NotBiRegular(_))
        ));
    }

    #[test]
    fn three_layers_have_two_step_constraints() {
        let g = Dto1Game::random(3, 6, 1, 2, 1, true, &mut stage_rng(0, "k1")).unwrap();
        let pcp = build_smooth_mlpcp(&g, 3, 1).unwrap();
        assert!(!pcp.constraints_between(0, 2).is_empty());
        pcp.check_satisfies(pcp.planted().unwrap()).unwrap();
    }
}
