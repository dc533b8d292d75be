//! Combinatorics of exceptional collections: enumerate admissible
//! collections against a curve class, order them by inclusion of their
//! cones, and emit a deterministic blowup schedule.

use thiserror::Error;

use crate::lattice::{is_exceptional, pair, LatticeClass, LatticeError, SurfaceGeometry};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemeError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("order relation contains a cycle through collection {0}")]
    Cycle(usize),
    #[error("edge ({0}, {1}) refers to a collection out of range")]
    EdgeOutOfRange(usize, usize),
}

/// A finite collection of exceptional classes, each meeting the curve
/// class negatively and meeting the others nonnegatively. The cone it
/// spans is represented by its generator list (the members).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collection {
    /// Positions of the members in the candidate list.
    pub member_indices: Vec<usize>,
    pub members: Vec<LatticeClass>,
}

impl Collection {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    fn generators(&self) -> Vec<&[i64]> {
        self.members.iter().map(|m| m.coords.as_slice()).collect()
    }
}

/// All subsets of `candidates` up to `max_size` whose members are
/// exceptional, meet `c` negatively, and meet each other nonnegatively,
/// in lexicographic order of candidate indices.
pub fn enumerate_collections(
    c: &LatticeClass,
    candidates: &[LatticeClass],
    g: &SurfaceGeometry,
    max_size: usize,
) -> Result<Vec<Collection>, SchemeError> {
    let mut eligible = Vec::new();
    for (i, e) in candidates.iter().enumerate() {
        if is_exceptional(e, g)? && pair(c, e, g)? < 0 {
            eligible.push(i);
        }
    }
    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    fn extend(
        eligible: &[usize],
        candidates: &[LatticeClass],
        g: &SurfaceGeometry,
        max_size: usize,
        from: usize,
        stack: &mut Vec<usize>,
        out: &mut Vec<Collection>,
    ) -> Result<(), SchemeError> {
        for pos in from..eligible.len() {
            let idx = eligible[pos];
            let mut compatible = true;
            for &prev in stack.iter() {
                if pair(&candidates[prev], &candidates[idx], g)? < 0 {
                    compatible = false;
                    break;
                }
            }
            if !compatible {
                continue;
            }
            stack.push(idx);
            out.push(Collection {
                member_indices: stack.clone(),
                members: stack.iter().map(|&i| candidates[i].clone()).collect(),
            });
            if stack.len() < max_size {
                extend(eligible, candidates, g, max_size, pos + 1, stack, out)?;
            }
            stack.pop();
        }
        Ok(())
    }
    if max_size >= 1 {
        extend(&eligible, candidates, g, max_size, 0, &mut stack, &mut out)?;
    }
    Ok(out)
}

/// Decides whether `target` is a nonnegative integer combination of the
/// generators, by exhaustive search with each coefficient bounded by
/// (max |target coordinate|) x (lattice rank). Exceptional classes in
/// practice have small coordinates, so the bounded search is exact there.
pub fn in_cone(target: &[i64], generators: &[&[i64]]) -> bool {
    if target.iter().all(|&x| x == 0) {
        return true;
    }
    if generators.is_empty() {
        return false;
    }
    let bound =
        target.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0) as i64 * target.len() as i64;
    fn search(remainder: &mut Vec<i64>, generators: &[&[i64]], k: usize, bound: i64) -> bool {
        if k == generators.len() {
            return remainder.iter().all(|&x| x == 0);
        }
        for coeff in 0..=bound {
            if coeff > 0 {
                for (r, &gv) in remainder.iter_mut().zip(generators[k]) {
                    *r -= gv;
                }
            }
            if search(remainder, generators, k + 1, bound) {
                for (r, &gv) in remainder.iter_mut().zip(generators[k]) {
                    *r += coeff * gv;
                }
                return true;
            }
        }
        for (r, &gv) in remainder.iter_mut().zip(generators[k]) {
            *r += bound * gv;
        }
        false
    }
    let mut remainder = target.to_vec();
    search(&mut remainder, generators, 0, bound)
}

fn cone_contains(outer: &Collection, inner: &Collection) -> bool {
    let gens = outer.generators();
    inner.generators().iter().all(|t| in_cone(t, &gens))
}

/// Edges `(a, b)` whenever the cone of collection `a` is strictly
/// contained in the cone of collection `b`.
pub fn cone_partial_order(collections: &[Collection]) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for a in 0..collections.len() {
        for b in 0..collections.len() {
            if a == b {
                continue;
            }
            let a_in_b = cone_contains(&collections[b], &collections[a]);
            let b_in_a = cone_contains(&collections[a], &collections[b]);
            if a_in_b && !b_in_a {
                edges.push((a, b));
            }
        }
    }
    edges
}

/// A linear extension of the cone partial order. Reversing `ordered`
/// yields the blowup order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub ordered: Vec<Collection>,
    /// `ordered[k]` is `input[permutation[k]]` of the linearized list.
    pub permutation: Vec<usize>,
    /// The defining edges, in input indexing.
    pub order_relation: Vec<(usize, usize)>,
}

impl Schedule {
    pub fn is_linear_extension(&self) -> bool {
        let mut position = vec![0usize; self.permutation.len()];
        for (pos, &idx) in self.permutation.iter().enumerate() {
            position[idx] = pos;
        }
        self.order_relation
            .iter()
            .all(|&(a, b)| position[a] < position[b])
    }

    /// The blowup order: the linear order reversed.
    pub fn blowup_order(&self) -> Vec<&Collection> {
        self.ordered.iter().rev().collect()
    }
}

/// Deterministic topological sort of the collections against the given
/// partial order. Ties are broken by collection size descending, then by
/// lexicographic member indices. A cycle in the edges signals
/// inconsistent cone data and is an error.
pub fn linearize(
    collections: &[Collection],
    order_relation: &[(usize, usize)],
) -> Result<Schedule, SchemeError> {
    let n = collections.len();
    let mut indegree = vec![0usize; n];
    let mut successors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in order_relation {
        if a >= n || b >= n {
            return Err(SchemeError::EdgeOutOfRange(a, b));
        }
        indegree[b] += 1;
        successors[a].push(b);
    }
    let mut available: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut permutation = Vec::with_capacity(n);
    while !available.is_empty() {
        available.sort_by(|&a, &b| {
            collections[b]
                .size()
                .cmp(&collections[a].size())
                .then_with(|| {
                    collections[a]
                        .member_indices
                        .cmp(&collections[b].member_indices)
                })
        });
        let next = available.remove(0);
        permutation.push(next);
        for &succ in &successors[next] {
            indegree[succ] -= 1;
            if indegree[succ] == 0 {
                available.push(succ);
            }
        }
    }
    if permutation.len() < n {
        let stuck = (0..n).find(|&i| indegree[i] > 0).unwrap_or(0);
        return Err(SchemeError::Cycle(stuck));
    }
    Ok(Schedule {
        ordered: permutation
            .iter()
            .map(|&i| collections[i].clone())
            .collect(),
        permutation,
        order_relation: order_relation.to_vec(),
    })
}
