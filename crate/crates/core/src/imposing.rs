//! The graph on triangles induced by additive triples, and the
//! classification deciding whether `π` is affine imposing on every triangle.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::additivity::AdditiveSet;
use crate::geometry::{Complex, Face, FaceKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum EdgeClass {
    /// Linked through a vertex.
    E0,
    /// Linked through a diagonal edge.
    Ediag,
}

#[derive(Clone, Debug)]
struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct ImposingGraph {
    pub q: u32,
    pub nodes: Vec<Face>,
    /// Undirected edges `(a, b, class)` with `a < b`, sorted; loops dropped.
    pub edges: BTreeSet<(Face, Face, EdgeClass)>,
    /// Component id of each node, numbered by first appearance.
    component_of: Vec<usize>,
    components: Vec<Vec<Face>>,
}

impl ImposingGraph {
    pub fn components(&self) -> &[Vec<Face>] {
        &self.components
    }

    pub fn component_id(&self, triangle: Face) -> usize {
        let cx = Complex::new(self.q);
        self.component_of[cx.triangle_index(triangle)]
    }

    /// The component containing `triangle`.
    pub fn component(&self, triangle: Face) -> &[Face] {
        &self.components[self.component_id(triangle)]
    }

    pub fn has_edge(&self, a: Face, b: Face, class: EdgeClass) -> bool {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.edges.contains(&(a, b, class))
    }
}

/// Builds the graph from every additive triple with two triangles and one
/// vertex (`E0`) or one diagonal edge (`Ediag`), in either position.
pub fn build_graph(e: &AdditiveSet) -> ImposingGraph {
    let cx = Complex::new(e.q);
    let nodes: Vec<Face> = cx.triangles().collect();
    let mut edges = BTreeSet::new();
    let mut uf = UnionFind::new(nodes.len());
    for t in &e.triples {
        let faces = t.faces();
        let tris: Vec<Face> = faces
            .iter()
            .copied()
            .filter(|f| f.kind.is_triangle())
            .collect();
        if tris.len() != 2 {
            continue;
        }
        // E is closed under swapping the first two slots, so the odd face
        // may sit anywhere.
        let other = faces.iter().find(|f| !f.kind.is_triangle()).unwrap();
        let class = match other.kind {
            FaceKind::Vertex => EdgeClass::E0,
            FaceKind::EdgeD => EdgeClass::Ediag,
            _ => continue,
        };
        let (a, b) = (tris[0].min(tris[1]), tris[0].max(tris[1]));
        if a == b {
            continue;
        }
        edges.insert((a, b, class));
        uf.union(cx.triangle_index(a), cx.triangle_index(b));
    }
    let mut component_of = vec![usize::MAX; nodes.len()];
    let mut components: Vec<Vec<Face>> = Vec::new();
    let mut root_id = vec![usize::MAX; nodes.len()];
    for (idx, &node) in nodes.iter().enumerate() {
        let r = uf.find(idx);
        if root_id[r] == usize::MAX {
            root_id[r] = components.len();
            components.push(Vec::new());
        }
        component_of[idx] = root_id[r];
        components[root_id[r]].push(node);
    }
    ImposingGraph {
        q: e.q,
        nodes,
        edges,
        component_of,
        components,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WitnessCategory {
    /// Outside both bar sets: a two-dimensional bump perturbation applies.
    OutsideBoth,
    /// In the diagonal-only set: a diagonal wave perturbation applies.
    InBarS1,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub i1: BTreeSet<Face>,
    pub i2: BTreeSet<Face>,
    pub s1: BTreeSet<Face>,
    pub s2: BTreeSet<Face>,
    pub bar_s: BTreeSet<Face>,
    pub bar_s1: BTreeSet<Face>,
    pub bar_s2: BTreeSet<Face>,
    pub affine_imposing: bool,
    pub witness: Option<(Face, WitnessCategory)>,
}

fn closure(g: &ImposingGraph, seeds: &BTreeSet<Face>) -> BTreeSet<Face> {
    let mut ids: Vec<usize> = seeds.iter().map(|&t| g.component_id(t)).collect();
    ids.sort_unstable();
    ids.dedup();
    ids.into_iter()
        .flat_map(|c| g.components[c].iter().copied())
        .collect()
}

fn shares_axis_edge(cx: &Complex, a: Face, b: Face) -> bool {
    cx.intersection(a, b)
        .iter()
        .any(|f| matches!(f.kind, FaceKind::EdgeH | FaceKind::EdgeV))
}

/// Components of members of `s1` that meet some member of `s2` in a
/// horizontal or vertical edge.
fn compute_bar_s(
    cx: &Complex,
    g: &ImposingGraph,
    s1: &BTreeSet<Face>,
    s2: &BTreeSet<Face>,
) -> BTreeSet<Face> {
    let seeds: BTreeSet<Face> = s1
        .iter()
        .copied()
        .filter(|&i| s2.iter().any(|&j| shares_axis_edge(cx, i, j)))
        .collect();
    closure(g, &seeds)
}

/// Computes the classification sets in one pass. With `fixpoint` set, the
/// bar-set step is repeated against the enlarged sets until nothing moves.
pub fn classify(g: &ImposingGraph, e: &AdditiveSet, fixpoint: bool) -> Classification {
    let cx = Complex::new(e.q);
    let mut i1 = BTreeSet::new();
    let mut i2 = BTreeSet::new();
    for t in &e.triples {
        let faces = t.faces();
        let tri = faces.iter().filter(|f| f.kind.is_triangle()).count();
        if tri == 3 {
            i2.extend(faces);
        } else if tri == 2 && faces.iter().any(|f| f.kind == FaceKind::EdgeD) {
            i1.extend(faces.iter().copied().filter(|f| f.kind.is_triangle()));
        }
    }
    let s1 = closure(g, &i1);
    let s2 = closure(g, &i2);
    let mut bar_s = compute_bar_s(&cx, g, &s1, &s2);
    let mut bar_s2: BTreeSet<Face> = s2.union(&bar_s).copied().collect();
    let mut bar_s1: BTreeSet<Face> = s1.difference(&bar_s).copied().collect();
    if fixpoint {
        loop {
            let next = compute_bar_s(&cx, g, &bar_s1, &bar_s2);
            if next.is_subset(&bar_s) {
                break;
            }
            bar_s.extend(next);
            bar_s2 = s2.union(&bar_s).copied().collect();
            bar_s1 = s1.difference(&bar_s).copied().collect();
        }
    }
    let affine_imposing = bar_s2.len() == cx.num_triangles();
    let witness = if affine_imposing {
        None
    } else {
        let outside = |t: &Face| !bar_s2.contains(t);
        cx.triangles()
            .find(|t| outside(t) && !bar_s1.contains(t))
            .map(|t| (t, WitnessCategory::OutsideBoth))
            .or_else(|| {
                cx.triangles()
                    .find(|t| outside(t) && bar_s1.contains(t))
                    .map(|t| (t, WitnessCategory::InBarS1))
            })
    };
    Classification {
        i1,
        i2,
        s1,
        s2,
        bar_s,
        bar_s1,
        bar_s2,
        affine_imposing,
        witness,
    }
}
