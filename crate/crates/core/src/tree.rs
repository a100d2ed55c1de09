//! Vertex addressing on `T_d`.
//!
//! A vertex is the sequence of child indices on the way down from a fixed
//! root. The root has `d` children (`0..d`), every other vertex has `d - 1`
//! (`0..d-1`), so an address names each vertex exactly once and balls of
//! different radii share coordinates.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

pub const DEFAULT_VERTEX_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct VertexId {
    address: Vec<u32>,
}

impl VertexId {
    pub fn root() -> Self {
        Self::default()
    }

    /// Unchecked constructor; use [`VertexId::validate`] before relying on it.
    pub fn from_steps(steps: impl Into<Vec<u32>>) -> Self {
        Self {
            address: steps.into(),
        }
    }

    pub fn steps(&self) -> &[u32] {
        &self.address
    }

    pub fn depth(&self) -> usize {
        self.address.len()
    }

    pub fn is_root(&self) -> bool {
        self.address.is_empty()
    }

    pub fn parent(&self) -> Option<Self> {
        if self.is_root() {
            return None;
        }
        Some(Self {
            address: self.address[..self.address.len() - 1].to_vec(),
        })
    }

    pub fn child(&self, index: u32) -> Self {
        let mut address = self.address.clone();
        address.push(index);
        Self { address }
    }

    /// Number of children of this vertex in `T_d`.
    pub fn child_count(&self, d: usize) -> usize {
        if self.is_root() {
            d
        } else {
            d - 1
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        for (i, &s) in self.address.iter().enumerate() {
            let limit = if i == 0 { d } else { d - 1 };
            if s as usize >= limit {
                return Err(Error::MalformedAddress(format!(
                    "step {i} of {self} is {s}, must be below {limit} for d = {d}"
                )));
            }
        }
        Ok(())
    }

    /// Depth of the lowest common ancestor.
    pub fn common_depth(&self, other: &Self) -> usize {
        self.address
            .iter()
            .zip(&other.address)
            .take_while(|(a, b)| a == b)
            .count()
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.address.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for VertexId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Ok(Self::root());
        }
        let address = s
            .split('/')
            .map(|p| {
                p.parse::<u32>()
                    .map_err(|_| Error::MalformedAddress(s.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { address })
    }
}

/// Graph distance between two vertices of `T_d`.
pub fn distance(d: usize, u: &VertexId, v: &VertexId) -> Result<usize> {
    u.validate(d)?;
    v.validate(d)?;
    Ok(distance_unchecked(u, v))
}

pub(crate) fn distance_unchecked(u: &VertexId, v: &VertexId) -> usize {
    u.depth() + v.depth() - 2 * u.common_depth(v)
}

/// Size of the sphere of radius `k` in `T_d`.
pub fn sphere_size(d: usize, k: usize) -> u128 {
    if k == 0 {
        return 1;
    }
    (d as u128).saturating_mul(((d - 1) as u128).saturating_pow(k as u32 - 1))
}

/// Size of the ball of radius `r` in `T_d`.
pub fn ball_size(d: usize, r: usize) -> u128 {
    (0..=r).fold(0u128, |acc, k| acc.saturating_add(sphere_size(d, k)))
}

/// The ball of radius `r` around the root, in breadth-first order.
#[derive(Debug, Clone)]
pub struct Ball {
    d: usize,
    radius: usize,
    vertices: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    parent: Vec<Option<usize>>,
    children: Vec<Range<usize>>,
    sphere_start: Vec<usize>,
}

impl Ball {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &VertexId {
        &self.vertices[i]
    }

    pub fn position(&self, v: &VertexId) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    /// Positions of the children of `i` inside the ball (empty on the boundary).
    pub fn children(&self, i: usize) -> Range<usize> {
        self.children[i].clone()
    }

    /// Positions of all neighbors of `i` that lie in the ball.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.parent[i].into_iter().chain(self.children(i))
    }

    /// Positions of the sphere of radius `k`.
    pub fn sphere(&self, k: usize) -> Range<usize> {
        self.sphere_start[k]..self.sphere_start[k + 1]
    }

    pub fn sphere_sizes(&self) -> Vec<usize> {
        (0..=self.radius).map(|k| self.sphere(k).len()).collect()
    }

    /// Vertices strictly inside the ball, i.e. with all `d` neighbors present.
    pub fn interior(&self) -> Range<usize> {
        0..self.sphere_start[self.radius]
    }

    /// `(parent, child)` position pairs.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(c, p)| p.map(|p| (p, c)))
    }
}

pub fn enumerate_ball(d: usize, r: usize) -> Result<Ball> {
    enumerate_ball_with_budget(d, r, DEFAULT_VERTEX_BUDGET)
}

pub fn enumerate_ball_with_budget(d: usize, r: usize, budget: usize) -> Result<Ball> {
    if d < 3 {
        return Err(Error::InvalidDegree(d));
    }
    let size = ball_size(d, r);
    if size > budget as u128 {
        return Err(Error::BudgetExceeded {
            radius: r,
            size,
            budget,
        });
    }
    let size = size as usize;
    let mut vertices = Vec::with_capacity(size);
    let mut parent = Vec::with_capacity(size);
    let mut children = Vec::with_capacity(size);
    let mut sphere_start = vec![0];
    vertices.push(VertexId::root());
    parent.push(None);
    sphere_start.push(1);
    for k in 0..r {
        let level = sphere_start[k]..sphere_start[k + 1];
        for i in level {
            let start = vertices.len();
            let v = vertices[i].clone();
            for c in 0..v.child_count(d) {
                vertices.push(v.child(c as u32));
                parent.push(Some(i));
            }
            children.push(start..vertices.len());
        }
        sphere_start.push(vertices.len());
    }
    while children.len() < vertices.len() {
        children.push(0..0);
    }
    let index = vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), i))
        .collect();
    Ok(Ball {
        d,
        radius: r,
        vertices,
        index,
        parent,
        children,
        sphere_start,
    })
}

/// The descending chain `root, [0], [0, 0], ...` of `n` vertices.
pub fn canonical_path(d: usize, n: usize) -> Result<Vec<VertexId>> {
    if d < 3 {
        return Err(Error::InvalidDegree(d));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("path needs at least one vertex".into()));
    }
    Ok((0..n).map(|k| VertexId::from_steps(vec![0; k])).collect())
}
