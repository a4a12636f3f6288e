use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::CspError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameConstraint {
    pub v: usize,
    pub u: usize,
    /// π_{v→u}: [m] → [k].
    pub proj: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameLabeling {
    pub u_labels: Vec<usize>,
    pub v_labels: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct GameJson {
    num_u: usize,
    num_v: usize,
    k: usize,
    m: usize,
    d: usize,
    constraints: Vec<GameConstraint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    planted: Option<GameLabeling>,
}

/// A d-to-1 label-cover game between U-variables (labels [k]) and
/// V-variables (labels [m] with m = d·k).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GameJson", into = "GameJson")]
pub struct Dto1Game {
    num_u: usize,
    num_v: usize,
    k: usize,
    m: usize,
    d: usize,
    constraints: Vec<GameConstraint>,
    planted: Option<GameLabeling>,
}

impl TryFrom<GameJson> for Dto1Game {
    type Error = CspError;

    fn try_from(g: GameJson) -> Result<Self, CspError> {
        let game = Dto1Game::new(g.num_u, g.num_v, g.k, g.d, g.constraints)?;
        if game.m != g.m {
            return Err(CspError::Invalid(format!(
                "m = {} but d·k = {}",
                g.m, game.m
            )));
        }
        match g.planted {
            Some(p) => game.with_planted(p),
            None => Ok(game),
        }
    }
}

impl From<Dto1Game> for GameJson {
    fn from(g: Dto1Game) -> Self {
        GameJson {
            num_u: g.num_u,
            num_v: g.num_v,
            k: g.k,
            m: g.m,
            d: g.d,
            constraints: g.constraints,
            planted: g.planted,
        }
    }
}

impl Dto1Game {
    pub fn new(
        num_u: usize,
        num_v: usize,
        k: usize,
        d: usize,
        constraints: Vec<GameConstraint>,
    ) -> Result<Self, CspError> {
        if k == 0 || d == 0 {
            return Err(CspError::Invalid("k and d must be positive".into()));
        }
        let m = d * k;
        for (idx, c) in constraints.iter().enumerate() {
            if c.v >= num_v || c.u >= num_u {
                return Err(CspError::Invalid(format!(
                    "constraint {idx} endpoint out of range"
                )));
            }
            if c.proj.len() != m {
                return Err(CspError::Invalid(format!(
                    "constraint {idx} projection has {} entries, expected {m}",
                    c.proj.len()
                )));
            }
            let mut counts = vec![0usize; k];
            for &a in &c.proj {
                if a >= k {
                    return Err(CspError::Invalid(format!(
                        "constraint {idx} maps outside [k]"
                    )));
                }
                counts[a] += 1;
            }
            if counts.iter().any(|&c| c != d) {
                return Err(CspError::Invalid(format!(
                    "constraint {idx} is not {d}-to-1"
                )));
            }
        }
        Ok(Self {
            num_u,
            num_v,
            k,
            m,
            d,
            constraints,
            planted: None,
        })
    }

    pub fn with_planted(mut self, labeling: GameLabeling) -> Result<Self, CspError> {
        if labeling.u_labels.len() != self.num_u || labeling.v_labels.len() != self.num_v {
            return Err(CspError::Invalid(
                "planted labeling has the wrong length".into(),
            ));
        }
        if labeling.u_labels.iter().any(|&a| a >= self.k)
            || labeling.v_labels.iter().any(|&a| a >= self.m)
        {
            return Err(CspError::Invalid("planted label out of range".into()));
        }
        if let Some(i) = self
            .constraints
            .iter()
            .position(|c| c.proj[labeling.v_labels[c.v]] != labeling.u_labels[c.u])
        {
            return Err(CspError::Unsatisfied(i));
        }
        self.planted = Some(labeling);
        Ok(self)
    }

    /// Random bi-regular game in which every V-variable has `deg_v`
    /// constraints. With `planted`, a hidden labeling satisfying every
    /// constraint is built in and recorded; otherwise projections are
    /// uniformly random d-to-1 maps.
    pub fn random(
        num_u: usize,
        num_v: usize,
        k: usize,
        d: usize,
        deg_v: usize,
        planted: bool,
        rng: &mut impl Rng,
    ) -> Result<Self, CspError> {
        if num_u == 0 || num_v == 0 || !(num_v * deg_v).is_multiple_of(num_u) {
            return Err(CspError::NotBiRegular(format!(
                "{num_v}·{deg_v} edges cannot be spread evenly over {num_u} U-variables"
            )));
        }
        let deg_u = num_v * deg_v / num_u;
        if deg_v > num_u || deg_u > num_v {
            return Err(CspError::NotBiRegular(
                "degree exceeds the other side".into(),
            ));
        }
        let m = d * k;
        let edges = random_biregular_edges(num_u, num_v, deg_v, deg_u, rng)?;
        let u_labels: Vec<usize> = (0..num_u).map(|_| rng.random_range(0..k)).collect();
        let v_labels: Vec<usize> = (0..num_v).map(|_| rng.random_range(0..m)).collect();
        let constraints = edges
            .into_iter()
            .map(|(v, u)| {
                let mut proj: Vec<usize> = (0..m).map(|a| a / d).collect();
                proj.shuffle(rng);
                if planted {
                    let want = u_labels[u];
                    let have = proj[v_labels[v]];
                    if have != want {
                        let swap = proj.iter().position(|&b| b == want).unwrap();
                        proj.swap(swap, v_labels[v]);
                    }
                }
                GameConstraint { v, u, proj }
            })
            .collect();
        let game = Self::new(num_u, num_v, k, d, constraints)?;
        if planted {
            game.with_planted(GameLabeling { u_labels, v_labels })
        } else {
            Ok(game)
        }
    }

    pub fn num_u(&self) -> usize {
        self.num_u
    }

    pub fn num_v(&self) -> usize {
        self.num_v
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn constraints(&self) -> &[GameConstraint] {
        &self.constraints
    }

    pub fn planted(&self) -> Option<&GameLabeling> {
        self.planted.as_ref()
    }

    /// Per-side degree sequences.
    pub fn degrees(&self) -> (Vec<usize>, Vec<usize>) {
        let mut du = vec![0; self.num_u];
        let mut dv = vec![0; self.num_v];
        for c in &self.constraints {
            du[c.u] += 1;
            dv[c.v] += 1;
        }
        (du, dv)
    }

    pub fn is_bi_regular(&self) -> bool {
        let (du, dv) = self.degrees();
        du.windows(2).all(|w| w[0] == w[1]) && dv.windows(2).all(|w| w[0] == w[1])
    }

    pub fn satisfied_fraction(&self, labeling: &GameLabeling) -> f64 {
        if self.constraints.is_empty() {
            return 1.0;
        }
        let sat = self
            .constraints
            .iter()
            .filter(|c| c.proj[labeling.v_labels[c.v]] == labeling.u_labels[c.u])
            .count();
        sat as f64 / self.constraints.len() as f64
    }
}

fn random_biregular_edges(
    num_u: usize,
    num_v: usize,
    deg_v: usize,
    deg_u: usize,
    rng: &mut impl Rng,
) -> Result<Vec<(usize, usize)>, CspError> {
    let mut v_stubs: Vec<usize> = (0..num_v)
        .flat_map(|v| std::iter::repeat_n(v, deg_v))
        .collect();
    v_stubs.sort_unstable();
    let u_stubs: Vec<usize> = (0..num_u)
        .flat_map(|u| std::iter::repeat_n(u, deg_u))
        .collect();
    'attempt: for _ in 0..10_000 {
        let mut u_perm = u_stubs.clone();
        u_perm.shuffle(rng);
        let mut edges: Vec<(usize, usize)> = v_stubs.iter().copied().zip(u_perm).collect();
        edges.sort_unstable();
        for w in edges.windows(2) {
            if w[0] == w[1] {
                continue 'attempt;
            }
        }
        return Ok(edges);
    }
    Err(CspError::NotBiRegular(
        "could not sample a simple bi-regular graph".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stage_rng;

    #[test]
    fn planted_game_is_satisfied_and_biregular() {
        let mut rng = stage_rng(3, "game");
        let g = Dto1Game::random(3, 6, 2, 2, 2, true, &mut rng).unwrap();
        assert!(g.is_bi_regular());
        assert_eq!(g.constraints().len(), 12);
        assert_eq!(g.satisfied_fraction(g.planted().unwrap()), 1.0);
        let (du, _) = g.degrees();
        assert_eq!(du, vec![4, 4, 4]);
    }

    #[test]
    fn rejects_wrong_preimages() {
        let c = GameConstraint {
            v: 0,
            u: 0,
            proj: vec![0, 0, 0, 1],
        };
        assert!(Dto1Game::new(1, 1, 2, 2, vec![c]).is_err());
        assert!(matches!(
            Dto1Game::random(4, 3, 2, 2, 1, false, &mut stage_rng(0, "x")),
            Err(CspError::NotBiRegular(_))
        ));
    }

    #[test]
    fn json_roundtrip() {
        let g = Dto1Game::random(2, 4, 2, 2, 1, true, &mut stage_rng(5, "g")).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        let back: Dto1Game = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }
}
