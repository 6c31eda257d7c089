//! Realization of a finite 0-hyperbolic space as its minimal weighted tree.
//!
//! Points are inserted one at a time in label order. For a new point `w` and a
//! fixed root `r`, the attachment depth along `[r, x]` is the Gromov product
//! `(x|w)_r`; the deepest such attachment over inserted points `x` is where
//! `w` hangs off the current tree, by a pendant edge of length
//! `d(r,w) - depth`. Splitting an edge at that depth creates a Steiner node.
//!
//! Node ids are canonical: node `i < |M|` is point `i`; Steiner nodes follow in
//! creation order.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{FormatError, TreeError};
use crate::metric::{FiniteMetricSpace, FourPoint};
use crate::rational::{self, half, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Original(usize),
    Steiner,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub len: Rational,
}

/// A point of the realized tree: a node, or a point strictly inside an edge
/// at `offset` from the edge's `u` endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreePoint {
    Node(usize),
    OnEdge { edge: usize, offset: Rational },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealizedTree {
    nodes: Vec<NodeKind>,
    edges: Vec<Edge>,
    embedding: Vec<usize>,
    adjacency: Vec<Vec<(usize, usize)>>,
    node_dist: Vec<Vec<Rational>>,
    next_hop: Vec<Vec<usize>>,
}

/// Builds `conv(M)`. Fails with the violating quadruple if `M` is not
/// 0-hyperbolic.
pub fn realize(space: &FiniteMetricSpace) -> Result<RealizedTree, TreeError> {
    if let FourPoint::Fail(q) = space.four_point_check() {
        return Err(TreeError::NotZeroHyperbolic(q));
    }
    let mut builder = Builder::default();
    let order = space.sorted_order();
    let root = order[0];
    let mut node_of = vec![usize::MAX; space.len()];
    node_of[root] = builder.add_node(Some(root));
    let mut inserted = vec![root];

    for &w in &order[1..] {
        let mut best: Option<(Rational, usize)> = None;
        for &x in &inserted {
            let depth = space.gromov_product(x, w, root);
            if best.as_ref().is_none_or(|(b, _)| &depth > b) {
                best = Some((depth, x));
            }
        }
        let (depth, target) = best.expect("root is inserted");
        let attach = builder.locate(node_of[root], node_of[target], &depth)?;
        let pendant = space.d(root, w) - &depth;
        if pendant.is_negative() {
            return Err(TreeError::Malformed(format!(
                "negative pendant length while inserting point {w}"
            )));
        }
        if pendant.is_zero() {
            if builder.kind[attach].is_some() {
                return Err(TreeError::Malformed(format!(
                    "point {w} coincides with another point"
                )));
            }
            builder.kind[attach] = Some(w);
            node_of[w] = attach;
        } else {
            let leaf = builder.add_node(Some(w));
            builder.connect(attach, leaf, pendant);
            node_of[w] = leaf;
        }
        inserted.push(w);
    }

    builder.canonicalize();
    let tree = builder.finish(space.len())?;
    for i in 0..space.len() {
        for j in i + 1..space.len() {
            if tree.distance(i, j) != space.d(i, j) {
                return Err(TreeError::Malformed(format!(
                    "realized distance between points {i} and {j} does not match"
                )));
            }
        }
    }
    Ok(tree)
}

#[derive(Default)]
struct Builder {
    kind: Vec<Option<usize>>,
    adj: Vec<BTreeMap<usize, Rational>>,
    alive: Vec<bool>,
}

impl Builder {
    fn add_node(&mut self, point: Option<usize>) -> usize {
        self.kind.push(point);
        self.adj.push(BTreeMap::new());
        self.alive.push(true);
        self.kind.len() - 1
    }

    fn connect(&mut self, a: usize, b: usize, len: Rational) {
        self.adj[a].insert(b, len.clone());
        self.adj[b].insert(a, len);
    }

    fn disconnect(&mut self, a: usize, b: usize) -> Rational {
        self.adj[b].remove(&a);
        self.adj[a].remove(&b).expect("edge exists")
    }

    fn path(&self, from: usize, to: usize) -> Vec<usize> {
        let mut parent = vec![usize::MAX; self.kind.len()];
        let mut stack = vec![from];
        parent[from] = from;
        while let Some(u) = stack.pop() {
            if u == to {
                break;
            }
            for &v in self.adj[u].keys() {
                if parent[v] == usize::MAX {
                    parent[v] = u;
                    stack.push(v);
                }
            }
        }
        let mut path = vec![to];
        let mut cur = to;
        while cur != from {
            cur = parent[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }

    /// Node at distance `depth` from `from` on the path to `to`, splitting an
    /// edge if the position falls strictly inside it.
    fn locate(&mut self, from: usize, to: usize, depth: &Rational) -> Result<usize, TreeError> {
        if depth.is_negative() {
            return Err(TreeError::Malformed("negative attachment depth".into()));
        }
        let path = self.path(from, to);
        let mut walked = Rational::zero();
        if depth.is_zero() {
            return Ok(from);
        }
        for pair in path.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let len = self.adj[a][&b].clone();
            let next = &walked + &len;
            if &next == depth {
                return Ok(b);
            }
            if &next > depth {
                let offset = depth - &walked;
                self.disconnect(a, b);
                let mid = self.add_node(None);
                self.connect(a, mid, offset.clone());
                self.connect(mid, b, len - offset);
                return Ok(mid);
            }
            walked = next;
        }
        Err(TreeError::Malformed("attachment depth beyond path end".into()))
    }

    /// Contracts zero-length edges and splices out Steiner nodes of degree
    /// at most two.
    fn canonicalize(&mut self) {
        loop {
            let mut changed = false;
            for u in 0..self.kind.len() {
                if !self.alive[u] {
                    continue;
                }
                let zero = self.adj[u]
                    .iter()
                    .find(|(_, len)| len.is_zero())
                    .map(|(&v, _)| v);
                if let Some(v) = zero {
                    // keep whichever endpoint carries a point
                    let (keep, drop) = if self.kind[v].is_some() { (v, u) } else { (u, v) };
                    self.disconnect(keep, drop);
                    let moved: Vec<(usize, Rational)> =
                        self.adj[drop].iter().map(|(&w, l)| (w, l.clone())).collect();
                    for (w, len) in moved {
                        self.disconnect(drop, w);
                        self.connect(keep, w, len);
                    }
                    self.alive[drop] = false;
                    changed = true;
                    continue;
                }
                if self.kind[u].is_none() && self.adj[u].len() <= 2 {
                    let nbrs: Vec<(usize, Rational)> =
                        self.adj[u].iter().map(|(&w, l)| (w, l.clone())).collect();
                    for (w, _) in &nbrs {
                        self.disconnect(u, *w);
                    }
                    if let [(a, la), (b, lb)] = nbrs.as_slice() {
                        self.connect(*a, *b, la + lb);
                    }
                    self.alive[u] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    fn finish(self, points: usize) -> Result<RealizedTree, TreeError> {
        let mut new_id = vec![usize::MAX; self.kind.len()];
        let mut nodes: Vec<NodeKind> = (0..points).map(NodeKind::Original).collect();
        for (old, kind) in self.kind.iter().enumerate() {
            if !self.alive[old] {
                continue;
            }
            match kind {
                Some(p) => new_id[old] = *p,
                None => {
                    new_id[old] = nodes.len();
                    nodes.push(NodeKind::Steiner);
                }
            }
        }
        let mut edges = Vec::new();
        for (old, nbrs) in self.adj.iter().enumerate() {
            if !self.alive[old] {
                continue;
            }
            for (&w, len) in nbrs {
                let (a, b) = (new_id[old], new_id[w]);
                if a < b {
                    edges.push(Edge { u: a, v: b, len: len.clone() });
                }
            }
        }
        RealizedTree::from_parts(nodes, edges)
    }
}

impl RealizedTree {
    /// Assembles a tree from canonical parts, checking that the edge graph
    /// is a tree with positive lengths and that every Steiner node branches.
    pub fn from_parts(nodes: Vec<NodeKind>, mut edges: Vec<Edge>) -> Result<Self, TreeError> {
        let count = nodes.len();
        if count == 0 {
            return Err(TreeError::Malformed("no nodes".into()));
        }
        if edges.len() + 1 != count {
            return Err(TreeError::Malformed(format!(
                "{} nodes need {} edges, found {}",
                count,
                count - 1,
                edges.len()
            )));
        }
        for e in edges.iter_mut() {
            if e.u >= count || e.v >= count || e.u == e.v {
                return Err(TreeError::Malformed(format!("bad edge {}-{}", e.u, e.v)));
            }
            if !e.len.is_positive() {
                return Err(TreeError::Malformed(format!("edge {}-{} has non-positive length", e.u, e.v)));
            }
            if e.u > e.v {
                std::mem::swap(&mut e.u, &mut e.v);
            }
        }
        edges.sort_by_key(|e| (e.u, e.v));
        let mut adjacency = vec![Vec::new(); count];
        for (id, e) in edges.iter().enumerate() {
            adjacency[e.u].push((e.v, id));
            adjacency[e.v].push((e.u, id));
        }
        let mut embedding = Vec::new();
        for (id, kind) in nodes.iter().enumerate() {
            match kind {
                NodeKind::Original(p) => {
                    if *p != embedding.len() {
                        return Err(TreeError::Malformed("original nodes must come first, in point order".into()));
                    }
                    embedding.push(id);
                }
                NodeKind::Steiner => {
                    if adjacency[id].len() < 3 {
                        return Err(TreeError::Malformed(format!(
                            "Steiner node {id} has degree {}",
                            adjacency[id].len()
                        )));
                    }
                }
            }
        }
        let mut node_dist = vec![vec![Rational::zero(); count]; count];
        let mut next_hop = vec![vec![usize::MAX; count]; count];
        for src in 0..count {
            let mut seen = vec![false; count];
            seen[src] = true;
            next_hop[src][src] = src;
            let mut stack = vec![src];
            while let Some(u) = stack.pop() {
                for &(v, e) in &adjacency[u] {
                    if seen[v] {
                        continue;
                    }
                    seen[v] = true;
                    node_dist[src][v] = &node_dist[src][u] + &edges[e].len;
                    next_hop[src][v] = if u == src { v } else { next_hop[src][u] };
                    stack.push(v);
                }
            }
            if seen.iter().any(|s| !s) {
                return Err(TreeError::Malformed("edge graph is disconnected".into()));
            }
        }
        Ok(Self { nodes, edges, embedding, adjacency, node_dist, next_hop })
    }

    pub fn nodes(&self) -> &[NodeKind] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn point_count(&self) -> usize {
        self.embedding.len()
    }

    /// Node carrying point `p`.
    pub fn node_of(&self, p: usize) -> usize {
        self.embedding[p]
    }

    pub fn point_of(&self, node: usize) -> Option<usize> {
        match self.nodes[node] {
            NodeKind::Original(p) => Some(p),
            NodeKind::Steiner => None,
        }
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    /// `(neighbor, edge id)` pairs.
    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    /// Path length between two nodes.
    pub fn distance(&self, a: usize, b: usize) -> &Rational {
        &self.node_dist[a][b]
    }

    /// Nodes on the path from `a` to `b`, both ends included.
    pub fn path(&self, a: usize, b: usize) -> Vec<usize> {
        let mut out = vec![a];
        let mut cur = a;
        while cur != b {
            cur = self.next_hop[cur][b];
            out.push(cur);
        }
        out
    }

    /// Nodes of degree at least three.
    pub fn branching_points(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&v| self.degree(v) >= 3).collect()
    }

    /// Branching nodes that carry no point of `M`.
    pub fn missing_branch_points(&self) -> Vec<usize> {
        self.branching_points()
            .into_iter()
            .filter(|&v| self.nodes[v] == NodeKind::Steiner)
            .collect()
    }

    /// Points of `M` strictly inside the path from point `x` to point `y`.
    pub fn segment_interior_points(&self, x: usize, y: usize) -> Vec<usize> {
        let path = self.path(self.node_of(x), self.node_of(y));
        if path.len() <= 2 {
            return Vec::new();
        }
        path[1..path.len() - 1]
            .iter()
            .filter_map(|&v| self.point_of(v))
            .collect()
    }

    /// The points of `M` grouped by the connected component of the tree minus
    /// `node` they fall in, one group per neighbor (in neighbor order).
    pub fn branches_at(&self, node: usize) -> Vec<Vec<usize>> {
        self.adjacency[node]
            .iter()
            .map(|&(start, _)| {
                let mut points = Vec::new();
                let mut stack = vec![start];
                let mut seen = BTreeSet::from([node, start]);
                while let Some(u) = stack.pop() {
                    if let Some(p) = self.point_of(u) {
                        points.push(p);
                    }
                    for &(v, _) in &self.adjacency[u] {
                        if seen.insert(v) {
                            stack.push(v);
                        }
                    }
                }
                points.sort_unstable();
                points
            })
            .collect()
    }

    /// Point at distance `t` from node `from` on the path to node `to`.
    pub fn point_along(&self, from: usize, to: usize, t: &Rational) -> TreePoint {
        let mut walked = Rational::zero();
        if t.is_zero() || from == to {
            return TreePoint::Node(from);
        }
        let path = self.path(from, to);
        for pair in path.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let edge = self.edge_between(a, b);
            let len = &self.edges[edge].len;
            let next = &walked + len;
            if &next == t {
                return TreePoint::Node(b);
            }
            if &next > t {
                let from_a = t - &walked;
                let offset = if self.edges[edge].u == a { from_a } else { len - from_a };
                return TreePoint::OnEdge { edge, offset };
            }
            walked = next;
        }
        TreePoint::Node(to)
    }

    fn edge_between(&self, a: usize, b: usize) -> usize {
        self.adjacency[a]
            .iter()
            .find(|(v, _)| *v == b)
            .map(|(_, e)| *e)
            .expect("adjacent nodes")
    }

    fn distance_to_node(&self, p: &TreePoint, node: usize) -> Rational {
        match p {
            TreePoint::Node(v) => self.node_dist[*v][node].clone(),
            TreePoint::OnEdge { edge, offset } => {
                let e = &self.edges[*edge];
                let via_u = offset + &self.node_dist[e.u][node];
                let via_v = (&e.len - offset) + &self.node_dist[e.v][node];
                via_u.min(via_v)
            }
        }
    }

    /// Exact path length between two tree points.
    pub fn tree_distance(&self, p: &TreePoint, q: &TreePoint) -> Rational {
        match (p, q) {
            (_, TreePoint::Node(v)) => self.distance_to_node(p, *v),
            (TreePoint::Node(u), _) => self.distance_to_node(q, *u),
            (
                TreePoint::OnEdge { edge: e1, offset: o1 },
                TreePoint::OnEdge { edge: e2, offset: o2 },
            ) => {
                if e1 == e2 {
                    return (o1 - o2).abs();
                }
                let e = &self.edges[*e1];
                let via_u = o1 + self.distance_to_node(q, e.u);
                let via_v = (&e.len - o1) + self.distance_to_node(q, e.v);
                via_u.min(via_v)
            }
        }
    }

    /// Metric projection of point `w` onto the segment between points `x`
    /// and `y`, with the distance from `w` to it. The projection sits at
    /// depth `(y|w)_x` from `x`; its distance to `w` is `(x|y)_w`.
    pub fn project(&self, x: usize, y: usize, w: usize) -> (TreePoint, Rational) {
        let (nx, ny, nw) = (self.node_of(x), self.node_of(y), self.node_of(w));
        let dxy = &self.node_dist[nx][ny];
        let depth = (dxy + &self.node_dist[nx][nw] - &self.node_dist[ny][nw]) * half();
        let depth = depth.max(Rational::zero()).min(dxy.clone());
        let gap = (&self.node_dist[nx][nw] + &self.node_dist[ny][nw] - dxy) * half();
        (self.point_along(nx, ny, &depth), gap)
    }

    /// Distance from point `y` to the projection of `w` onto `[x, y]`.
    pub fn projection_depth_from(&self, x: usize, y: usize, w: usize) -> Rational {
        let (nx, ny, nw) = (self.node_of(x), self.node_of(y), self.node_of(w));
        let d = &self.node_dist[nx][ny];
        ((d + &self.node_dist[ny][nw] - &self.node_dist[nx][nw]) * half())
            .max(Rational::zero())
            .min(d.clone())
    }

    pub fn to_document(&self, space: &FiniteMetricSpace) -> TreeDocument {
        TreeDocument {
            base: Some(space.label(space.base()).to_string()),
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(id, kind)| match kind {
                    NodeKind::Original(p) => TreeNodeDoc {
                        id,
                        kind: "original".into(),
                        label: Some(space.label(*p).to_string()),
                    },
                    NodeKind::Steiner => TreeNodeDoc { id, kind: "steiner".into(), label: None },
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| TreeEdgeDoc { u: e.u, v: e.v, len: e.len.clone() })
                .collect(),
        }
    }

    /// Strict re-import of a document produced by [`RealizedTree::to_document`]
    /// for the given space: same ids, labels matching point order.
    pub fn from_document(doc: &TreeDocument, space: &FiniteMetricSpace) -> Result<Self, TreeError> {
        let mut nodes = vec![NodeKind::Steiner; doc.nodes.len()];
        let mut seen = vec![false; doc.nodes.len()];
        for n in &doc.nodes {
            if n.id >= nodes.len() || seen[n.id] {
                return Err(TreeError::Malformed(format!("bad or repeated node id {}", n.id)));
            }
            seen[n.id] = true;
            nodes[n.id] = match n.kind.as_str() {
                "original" => {
                    let label = n
                        .label
                        .as_deref()
                        .ok_or_else(|| TreeError::Malformed(format!("node {} has no label", n.id)))?;
                    let p = space
                        .index_of(label)
                        .map_err(|e| TreeError::Malformed(e.to_string()))?;
                    NodeKind::Original(p)
                }
                "steiner" => NodeKind::Steiner,
                other => return Err(TreeError::Malformed(format!("unknown node kind {other:?}"))),
            };
        }
        let edges = doc
            .edges
            .iter()
            .map(|e| Edge { u: e.u, v: e.v, len: e.len.clone() })
            .collect();
        let tree = Self::from_parts(nodes, edges)?;
        if tree.point_count() != space.len() {
            return Err(TreeError::Malformed("tree does not carry every point".into()));
        }
        Ok(tree)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNodeDoc {
    pub id: usize,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeEdgeDoc {
    pub u: usize,
    pub v: usize,
    #[serde(with = "rational::serde_text")]
    pub len: Rational,
}

/// Interchange form of a weighted tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    pub nodes: Vec<TreeNodeDoc>,
    pub edges: Vec<TreeEdgeDoc>,
}

impl TreeDocument {
    /// The finite metric space formed by the labelled nodes of an arbitrary
    /// weighted tree under its path metric. Unlabelled nodes may have any
    /// degree here; they are not points of the space.
    pub fn to_space(&self) -> Result<FiniteMetricSpace, FormatError> {
        let mut index = BTreeMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if index.insert(n.id, i).is_some() {
                return Err(FormatError::Invalid(format!("repeated node id {}", n.id)));
            }
        }
        let count = self.nodes.len();
        if count == 0 {
            return Err(FormatError::Invalid("tree has no nodes".into()));
        }
        if self.edges.len() + 1 != count {
            return Err(FormatError::Invalid("edge count must be node count minus one".into()));
        }
        let mut adj = vec![Vec::new(); count];
        for e in &self.edges {
            let (Some(&a), Some(&b)) = (index.get(&e.u), index.get(&e.v)) else {
                return Err(FormatError::Invalid(format!("edge {}-{} names an unknown node", e.u, e.v)));
            };
            if !e.len.is_positive() {
                return Err(FormatError::Invalid(format!("edge {}-{} must have positive length", e.u, e.v)));
            }
            adj[a].push((b, e.len.clone()));
            adj[b].push((a, e.len.clone()));
        }
        let labelled: Vec<(usize, String)> = self
            .nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.label.clone().map(|l| (i, l)))
            .collect();
        let mut dist = Vec::with_capacity(labelled.len());
        for &(src, _) in &labelled {
            let mut d: Vec<Option<Rational>> = vec![None; count];
            d[src] = Some(Rational::zero());
            let mut stack = vec![src];
            while let Some(u) = stack.pop() {
                let du = d[u].clone().expect("visited");
                for (v, len) in &adj[u] {
                    if d[*v].is_none() {
                        d[*v] = Some(&du + len);
                        stack.push(*v);
                    }
                }
            }
            let row: Option<Vec<Rational>> = labelled.iter().map(|(j, _)| d[*j].clone()).collect();
            dist.push(row.ok_or_else(|| FormatError::Invalid("tree is disconnected".into()))?);
        }
        let labels: Vec<String> = labelled.into_iter().map(|(_, l)| l).collect();
        let base = match &self.base {
            Some(b) => b.clone(),
            None => labels.first().cloned().ok_or_else(|| FormatError::Invalid("tree has no labelled nodes".into()))?,
        };
        Ok(FiniteMetricSpace::new(labels, &base, dist)?)
    }
}
