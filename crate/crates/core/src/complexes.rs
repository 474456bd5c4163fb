//! Labelled combinatorial 2- and 3-complexes, and the explicit van Kampen
//! diagrams `Δ^n_{ij}(w_k(r))`, `Θ^n_i(w_k(r))`, strips, single cells and slabs.
//!
//! Complexes are built, never discovered: constructors place vertices on a
//! grid, and edges are shared automatically when two faces name the same
//! `(source, target, label)` triple. Ids are assigned in construction order,
//! so exports are reproducible.
//!
//! Face orientation is normalised by propagating a coherent orientation from
//! the first face; face labels are validated up to rotation and inversion.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use num_bigint::BigUint;
use serde::Serialize;
use thiserror::Error;

use crate::growth::{apply_phi, phi_length_checked, GrowthError, GrowthTable};
use crate::presentations::{l_entry, Presentation, PresentationError};
use crate::words::{Gen, Letter, Word};
use crate::Config;

/// Errors raised by diagram constructors and complex queries.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexError {
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("{what}: {estimate} exceeds budget {budget}")]
    BudgetExceeded { what: String, estimate: String, budget: u64 },
    #[error("complex is not a disk: {0}")]
    NotADisk(String),
    #[error(transparent)]
    Growth(#[from] GrowthError),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
}

impl ComplexError {
    /// Stable machine-readable error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            ComplexError::IndexOutOfRange(_) => "IndexOutOfRange",
            ComplexError::BudgetExceeded { .. } => "BudgetExceeded",
            ComplexError::NotADisk(_) => "NotADisk",
            ComplexError::Growth(e) => e.kind(),
            ComplexError::Presentation(e) => e.kind(),
        }
    }
}

/// Declared topology of a complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Topology {
    Disk,
    Sphere,
    Ball,
}

impl Topology {
    /// Expected Euler characteristic.
    pub fn euler(&self) -> i64 {
        match self {
            Topology::Disk | Topology::Ball => 1,
            Topology::Sphere => 2,
        }
    }
}

/// A directed labelled edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub label: Gen,
}

/// A 2-cell: a closed path of edges, each traversed forwards or backwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    pub boundary: Vec<(usize, bool)>,
}

/// A labelled 2- or 3-dimensional cell complex.
#[derive(Debug, Clone)]
pub struct CellComplex {
    pub name: String,
    pub topology: Topology,
    vertex_count: usize,
    edges: Vec<Edge>,
    faces: Vec<Face>,
    cells3: Vec<Vec<usize>>,
    positions: Vec<Option<(f64, f64)>>,
    edge_index: HashMap<(usize, usize, Gen), usize>,
}

impl CellComplex {
    pub fn new(name: impl Into<String>, topology: Topology) -> Self {
        CellComplex {
            name: name.into(),
            topology,
            vertex_count: 0,
            edges: Vec::new(),
            faces: Vec::new(),
            cells3: Vec::new(),
            positions: Vec::new(),
            edge_index: HashMap::new(),
        }
    }

    pub fn add_vertex(&mut self) -> usize {
        self.vertex_count += 1;
        self.positions.push(None);
        self.vertex_count - 1
    }

    /// Adds a vertex with a drawing position.
    pub fn add_vertex_at(&mut self, x: f64, y: f64) -> usize {
        let v = self.add_vertex();
        self.positions[v] = Some((x, y));
        v
    }

    /// The edge `src → dst` with `label`, created on first use.
    pub fn edge(&mut self, src: usize, dst: usize, label: Gen) -> usize {
        if let Some(&e) = self.edge_index.get(&(src, dst, label)) {
            return e;
        }
        self.edges.push(Edge { src, dst, label });
        let id = self.edges.len() - 1;
        self.edge_index.insert((src, dst, label), id);
        id
    }

    fn step(&mut self, from: usize, to: usize, l: Letter) -> (usize, bool) {
        if l.inv {
            (self.edge(to, from, l.gen), false)
        } else {
            (self.edge(from, to, l.gen), true)
        }
    }

    /// Adds the face reading `letters[k]` from `vertices[k]` to `vertices[k+1]` (cyclically).
    pub fn add_face(&mut self, vertices: &[usize], letters: &[Letter]) -> usize {
        assert_eq!(vertices.len(), letters.len(), "face needs one letter per corner");
        let n = vertices.len();
        let boundary = (0..n).map(|k| self.step(vertices[k], vertices[(k + 1) % n], letters[k])).collect();
        self.faces.push(Face { boundary });
        self.faces.len() - 1
    }

    /// A new path from `start` reading `word`; returns its vertices (starting with `start`).
    pub fn path(&mut self, start: usize, word: &[Letter]) -> Vec<usize> {
        let mut vs = vec![start];
        for l in word {
            let v = self.add_vertex();
            let prev = *vs.last().expect("path is nonempty");
            self.step(prev, v, *l);
            vs.push(v);
        }
        vs
    }

    /// A new path from `start` to the existing vertex `end` reading `word`.
    pub fn path_between(&mut self, start: usize, end: usize, word: &[Letter]) -> Vec<usize> {
        assert!(!word.is_empty(), "path_between needs at least one letter");
        let mut vs = vec![start];
        for (k, l) in word.iter().enumerate() {
            let v = if k + 1 == word.len() { end } else { self.add_vertex() };
            let prev = *vs.last().expect("path is nonempty");
            self.step(prev, v, *l);
            vs.push(v);
        }
        vs
    }

    pub fn add_cell3(&mut self, faces: Vec<usize>) -> usize {
        self.cells3.push(faces);
        self.cells3.len() - 1
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }
    pub fn cells3(&self) -> &[Vec<usize>] {
        &self.cells3
    }
    /// Number of 2-cells.
    pub fn area(&self) -> usize {
        self.faces.len()
    }
    /// Number of 3-cells.
    pub fn volume(&self) -> usize {
        self.cells3.len()
    }

    /// `V − E + F − C`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edges.len() as i64 + self.faces.len() as i64 - self.cells3.len() as i64
    }

    /// The label of face `f`, read along its boundary (not reduced).
    pub fn face_word(&self, f: usize) -> Word {
        let letters: Vec<Letter> = self.faces[f]
            .boundary
            .iter()
            .map(|&(e, fwd)| Letter { gen: self.edges[e].label, inv: !fwd })
            .collect();
        // Relator labels are reduced words; a face never folds onto itself.
        Word::from_letters(letters)
    }

    /// Number of faces containing each edge.
    pub fn edge_incidence(&self) -> Vec<usize> {
        let mut inc = vec![0usize; self.edges.len()];
        for f in &self.faces {
            for &(e, _) in &f.boundary {
                inc[e] += 1;
            }
        }
        inc
    }

    /// Propagates a coherent orientation from face 0 across shared edges,
    /// reversing faces as needed. Returns `false` if no coherent orientation exists.
    pub fn orient(&mut self) -> bool {
        let mut by_edge: HashMap<usize, Vec<usize>> = HashMap::new();
        for (fi, f) in self.faces.iter().enumerate() {
            for &(e, _) in &f.boundary {
                by_edge.entry(e).or_default().push(fi);
            }
        }
        let n = self.faces.len();
        let mut flip: Vec<Option<bool>> = vec![None; n];
        let mut coherent = true;
        for root in 0..n {
            if flip[root].is_some() {
                continue;
            }
            flip[root] = Some(false);
            let mut queue = VecDeque::from([root]);
            while let Some(f) = queue.pop_front() {
                let ff = flip[f].expect("visited faces carry a flip");
                for &(e, fwd) in &self.faces[f].boundary {
                    let dir = fwd != ff;
                    for &g in &by_edge[&e] {
                        if g == f {
                            continue;
                        }
                        let gfwd = self.faces[g].boundary.iter().find(|b| b.0 == e).map(|b| b.1).unwrap_or(true);
                        // The neighbour must traverse e in the opposite direction.
                        let need = gfwd == dir;
                        match flip[g] {
                            None => {
                                flip[g] = Some(need);
                                queue.push_back(g);
                            }
                            Some(x) if x != need => coherent = false,
                            _ => {}
                        }
                    }
                }
            }
        }
        for (fi, fl) in flip.into_iter().enumerate() {
            if fl == Some(true) {
                let b = &mut self.faces[fi].boundary;
                b.reverse();
                for x in b.iter_mut() {
                    x.1 = !x.1;
                }
            }
        }
        coherent
    }

    /// The boundary cycle label of a disk, reduced, starting at the smallest
    /// boundary vertex.
    pub fn boundary_word(&self) -> Result<Word, ComplexError> {
        if self.topology != Topology::Disk {
            return Err(ComplexError::NotADisk(format!("{} is declared {:?}", self.name, self.topology)));
        }
        let mut c = self.clone();
        if !c.orient() {
            return Err(ComplexError::NotADisk("faces admit no coherent orientation".into()));
        }
        let inc = c.edge_incidence();
        if inc.iter().any(|&k| k == 0 || k > 2) {
            return Err(ComplexError::NotADisk("an edge lies in no face or in more than two".into()));
        }
        // Boundary half-edges in face orientation.
        let mut out: BTreeMap<usize, Vec<(usize, Letter)>> = BTreeMap::new();
        let mut total = 0usize;
        for f in &c.faces {
            for &(e, fwd) in &f.boundary {
                if inc[e] == 1 {
                    let ed = c.edges[e];
                    let (from, to) = if fwd { (ed.src, ed.dst) } else { (ed.dst, ed.src) };
                    out.entry(from).or_default().push((to, Letter { gen: ed.label, inv: !fwd }));
                    total += 1;
                }
            }
        }
        let Some((&start, _)) = out.iter().next() else {
            return Err(ComplexError::NotADisk("no boundary".into()));
        };
        if out.values().any(|v| v.len() != 1) {
            return Err(ComplexError::NotADisk("boundary is not a simple cycle".into()));
        }
        let mut letters = Vec::with_capacity(total);
        let mut v = start;
        loop {
            let (to, l) = out[&v][0];
            letters.push(l);
            v = to;
            if v == start || letters.len() > total {
                break;
            }
        }
        if letters.len() != total {
            return Err(ComplexError::NotADisk("boundary has several components".into()));
        }
        Ok(Word::from_letters(letters))
    }

    /// Serialisable document.
    pub fn to_document(&self) -> ComplexDocument {
        ComplexDocument {
            schema_version: crate::SCHEMA_VERSION,
            name: self.name.clone(),
            topology: self.topology,
            vertices: self.vertex_count,
            edges: self
                .edges
                .iter()
                .enumerate()
                .map(|(id, e)| EdgeDocument { id, src: e.src, dst: e.dst, label: e.label.to_string() })
                .collect(),
            faces: self
                .faces
                .iter()
                .enumerate()
                .map(|(id, f)| FaceDocument {
                    id,
                    boundary: f.boundary.iter().map(|&(e, fwd)| if fwd { e as i64 + 1 } else { -(e as i64 + 1) }).collect(),
                    label: self.face_word(id).to_string(),
                })
                .collect(),
            cells3: self.cells3.clone(),
        }
    }

    /// Graphviz rendering of the 1-skeleton.
    pub fn to_dot(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "digraph \"{}\" {{", self.name.replace('"', "'"));
        for v in 0..self.vertex_count {
            let _ = writeln!(s, "  v{v};");
        }
        for e in &self.edges {
            let _ = writeln!(s, "  v{} -> v{} [label=\"{}\"];", e.src, e.dst, e.label);
        }
        s.push_str("}\n");
        s
    }

    /// SVG drawing of a disk diagram from its construction coordinates.
    pub fn to_svg(&self) -> Option<String> {
        let pts: Vec<(f64, f64)> = self.positions.iter().map(|p| p.ok_or(())).collect::<Result<_, _>>().ok()?;
        if pts.is_empty() {
            return None;
        }
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for &(x, y) in &pts {
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        let scale = 40.0;
        let tx = |x: f64| (x - x0) * scale + 20.0;
        let ty = |y: f64| (y1 - y) * scale + 20.0;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\">",
            (x1 - x0) * scale + 40.0,
            (y1 - y0) * scale + 40.0
        );
        for e in &self.edges {
            let (a, b) = (pts[e.src], pts[e.dst]);
            let _ = writeln!(
                s,
                "  <line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>",
                tx(a.0),
                ty(a.1),
                tx(b.0),
                ty(b.1)
            );
            let _ = writeln!(
                s,
                "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"8\">{}</text>",
                (tx(a.0) + tx(b.0)) / 2.0,
                (ty(a.1) + ty(b.1)) / 2.0,
                e.label
            );
        }
        s.push_str("</svg>\n");
        Some(s)
    }
}

/// Serialisable view of a [`CellComplex`].
#[derive(Debug, Clone, Serialize)]
pub struct ComplexDocument {
    pub schema_version: u32,
    pub name: String,
    pub topology: Topology,
    pub vertices: usize,
    pub edges: Vec<EdgeDocument>,
    /// Signed 1-based edge ids: `+e` forwards, `-e` backwards.
    pub faces: Vec<FaceDocument>,
    pub cells3: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeDocument {
    pub id: usize,
    pub src: usize,
    pub dst: usize,
    pub label: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FaceDocument {
    pub id: usize,
    pub boundary: Vec<i64>,
    pub label: String,
}

/// Result of [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub faces: usize,
    pub euler_characteristic: i64,
    pub expected_euler_characteristic: i64,
    pub coherently_oriented: bool,
    /// Faces whose label is not a relator: `(face id, label)`.
    pub bad_faces: Vec<(usize, String)>,
    /// Edges with the wrong number of incident faces: `(edge id, count)`.
    pub bad_edges: Vec<(usize, usize)>,
    pub messages: Vec<String>,
}

/// Checks face labels against `p`, the Euler characteristic against the
/// declared topology, and edge–face (and face–3-cell) incidences.
pub fn validate(c: &CellComplex, p: &Presentation) -> ValidationReport {
    let mut messages = Vec::new();
    let bad_faces: Vec<(usize, String)> = (0..c.faces.len())
        .filter_map(|f| {
            let w = c.face_word(f);
            (!p.is_relator(&w)).then(|| (f, w.to_string()))
        })
        .collect();
    if !bad_faces.is_empty() {
        messages.push(format!("{} face label(s) are not relators of {}", bad_faces.len(), p.level));
    }
    let inc = c.edge_incidence();
    let bad_edges: Vec<(usize, usize)> = inc
        .iter()
        .enumerate()
        .filter(|&(_, &k)| match c.topology {
            Topology::Sphere => k != 2,
            Topology::Disk => k == 0 || k > 2,
            Topology::Ball => k == 0,
        })
        .map(|(e, &k)| (e, k))
        .collect();
    if !bad_edges.is_empty() {
        messages.push(format!("{} edge(s) have the wrong face incidence", bad_edges.len()));
    }
    let mut oriented = c.clone();
    let coherent = match c.topology {
        Topology::Ball => true,
        _ => oriented.orient(),
    };
    if !coherent {
        messages.push("faces admit no coherent orientation".into());
    }
    let mut ball_ok = true;
    if c.topology == Topology::Ball {
        let mut face_inc = vec![0usize; c.faces.len()];
        for cell in &c.cells3 {
            for &f in cell {
                face_inc[f] += 1;
            }
        }
        if face_inc.iter().any(|&k| k == 0 || k > 2) {
            ball_ok = false;
            messages.push("a face lies in no 3-cell or in more than two".into());
        }
    }
    let euler = c.euler_characteristic();
    let expected = c.topology.euler();
    if euler != expected {
        messages.push(format!("Euler characteristic {euler}, expected {expected}"));
    }
    ValidationReport {
        passed: bad_faces.is_empty() && bad_edges.is_empty() && coherent && ball_ok && euler == expected,
        faces: c.faces.len(),
        euler_characteristic: euler,
        expected_euler_characteristic: expected,
        coherently_oriented: coherent,
        bad_faces,
        bad_edges,
        messages,
    }
}

// ---------------------------------------------------------------------------
// Patches: building blocks glued along existing vertex paths.
// ---------------------------------------------------------------------------

/// Triangular half of a `Δ` diagram.
///
/// `u_path` (vertices `(x, 0)`, reading `u`) and `a_path` (vertices `(0, y)`,
/// reading `a`) start at the same corner and have `m + 1` vertices each. The
/// square `(x, y)` is cut by a diagonal edge `(x+1, y) → (x, y+1)` labelled
/// `diag(coord(a[y]), coord(u[x]))`; lower-left triangles exist for
/// `x + y ≤ m − 1`, upper-right ones for `x + y ≤ m − 2`, giving `m²` faces.
/// Returns the hypotenuse path from `(m, 0)` to `(0, m)`.
pub fn triangle_patch(
    c: &mut CellComplex,
    u_path: &[usize],
    a_path: &[usize],
    u: &[Letter],
    a: &[Letter],
    diag: impl Fn(u8, u8) -> Gen,
    frame: Option<(f64, f64, f64)>,
) -> Vec<usize> {
    let m = u.len();
    assert_eq!(a.len(), m);
    assert_eq!(u_path.len(), m + 1);
    assert_eq!(a_path.len(), m + 1);
    let mut grid: HashMap<(usize, usize), usize> = HashMap::new();
    for x in 0..=m {
        grid.insert((x, 0), u_path[x]);
    }
    for y in 0..=m {
        grid.insert((0, y), a_path[y]);
    }
    let mut vid = |c: &mut CellComplex, x: usize, y: usize| -> usize {
        *grid.entry((x, y)).or_insert_with(|| match frame {
            Some((ox, oy, sy)) => c.add_vertex_at(ox + x as f64, oy + sy * y as f64),
            None => c.add_vertex(),
        })
    };
    for y in 0..m {
        for x in 0..(m - y) {
            let p = vid(c, x, y);
            let q = vid(c, x + 1, y);
            let r = vid(c, x, y + 1);
            let (ul, al) = (u[x], a[y]);
            let d = diag(al.gen.basis_coord().unwrap_or(1), ul.gen.basis_coord().unwrap_or(1));
            c.add_face(&[p, q, r], &[ul, Letter::pos(d), al.inverse()]);
            if x + y + 2 <= m {
                let s = vid(c, x + 1, y + 1);
                c.add_face(&[q, s, r], &[al, ul.inverse(), Letter::neg(d)]);
            }
        }
    }
    (0..=m).map(|y| vid(c, m - y, y)).collect()
}

/// Trapezoid of coning cells `σ g σ^-1 = φ(g)`.
///
/// `base` holds the vertices of level 0 (reading `base_word`); `left[t]` and
/// `right[t]` are the leg vertices at level `t`, joined by rungs
/// `left[t] → left[t-1]` labelled `sigma[t-1]`. Level `t` reads `φ^t(base_word)`.
/// If `top` is given it is used as the last level. Returns the last level's
/// vertices. Faces: `Σ_{t<s} |φ^t(base_word)|`.
#[allow(clippy::too_many_arguments)]
pub fn trapezoid_patch(
    c: &mut CellComplex,
    base: &[usize],
    base_word: &Word,
    left: &[usize],
    right: &[usize],
    sigma: &[Letter],
    top: Option<&[usize]>,
    word_budget: u64,
) -> Result<Vec<usize>, ComplexError> {
    let s = sigma.len();
    assert_eq!(left.len(), s + 1);
    assert_eq!(right.len(), s + 1);
    let mut level_vs = base.to_vec();
    let mut level_w = base_word.clone();
    for t in 1..=s {
        let images: Vec<Word> = level_w
            .letters()
            .iter()
            .map(|l| apply_phi(&Word::letter(l.gen), 1, word_budget).map(|w| if l.inv { w.inverse() } else { w }))
            .collect::<Result<_, _>>()?;
        let next_len: usize = images.iter().map(|w| w.len()).sum();
        let next_vs: Vec<usize> = match (t == s, top) {
            (true, Some(tp)) => {
                assert_eq!(tp.len(), next_len + 1, "top path must read φ^s(base)");
                tp.to_vec()
            }
            _ => {
                let mut v = vec![left[t]];
                for _ in 1..next_len {
                    v.push(c.add_vertex());
                }
                v.push(right[t]);
                v
            }
        };
        let mut pos = 0usize;
        for (p, (l, img)) in level_w.letters().iter().zip(&images).enumerate() {
            let mut vs = vec![next_vs[pos], level_vs[p], level_vs[p + 1], next_vs[pos + img.len()]];
            let mut ls = vec![sigma[t - 1], *l, sigma[t - 1].inverse()];
            for (q, il) in img.letters().iter().enumerate().rev() {
                if q > 0 {
                    vs.push(next_vs[pos + q]);
                }
                ls.push(il.inverse());
            }
            c.add_face(&vs, &ls);
            pos += img.len();
        }
        level_vs = next_vs;
        level_w = Word::product(&images);
    }
    Ok(level_vs)
}

/// Strip of commutation cells `w_p g w_p^-1 g^-1` between two parallel paths
/// reading the same word `w`, with rungs `bottom[p] → top[p]` labelled `g`.
pub fn strip_patch(c: &mut CellComplex, bottom: &[usize], top: &[usize], w: &[Letter], rung: Gen) {
    assert_eq!(bottom.len(), w.len() + 1);
    assert_eq!(top.len(), w.len() + 1);
    for (p, l) in w.iter().enumerate() {
        c.add_face(
            &[bottom[p], bottom[p + 1], top[p + 1], top[p]],
            &[*l, Letter::pos(rung), l.inverse(), Letter::neg(rung)],
        );
    }
}

// ---------------------------------------------------------------------------
// Diagram descriptions and constructors.
// ---------------------------------------------------------------------------

/// Parameters of an explicit diagram.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum DiagramSpec {
    /// `Δ^n_{ij}(w_k(r))`.
    Delta { n: u32, i: u32, j: u32, k: u32, r: u64 },
    /// `Θ^n_i(w_k(r))`.
    Theta { n: u32, i: u32, k: u32, r: u64 },
    /// The slab `Δ^0_{12}(w_{k+1}(r)) × [0, 1]`.
    Slab { k: u32, r: u64 },
    /// A `length × 1` strip of `[side, rung]` cells.
    Strip { length: u64, side: Gen, rung: Gen },
    /// One 2-cell with the given label.
    SingleCell { label: Word },
}

fn check_budget(what: &str, cells: u128, budget: u64) -> Result<(), ComplexError> {
    if cells > budget as u128 {
        return Err(ComplexError::BudgetExceeded { what: what.to_string(), estimate: format!("{cells} cells"), budget });
    }
    Ok(())
}

/// `w_k(r)` as a machine integer, or `BudgetExceeded`.
fn side_length(k: u32, r: u64, what: &str, budget: u64) -> Result<u64, ComplexError> {
    crate::growth::w_u64(k, r).ok_or_else(|| ComplexError::BudgetExceeded {
        what: what.to_string(),
        estimate: format!("side w_{k}({r}) beyond 64 bits"),
        budget,
    })
}

/// The label `φ^{w_{k-1}(r)}(g)`, or `g^r` when `k = 0`.
pub fn scaled_label(g: Gen, k: u32, r: u64, word_budget: u64) -> Result<Word, ComplexError> {
    if k == 0 {
        if r > word_budget {
            return Err(ComplexError::BudgetExceeded {
                what: format!("{g}^{r}"),
                estimate: r.to_string(),
                budget: word_budget,
            });
        }
        return Ok(Word::power(g, r as i64));
    }
    let m = crate::growth::w_u64(k - 1, r).ok_or_else(|| ComplexError::BudgetExceeded {
        what: format!("φ^(w_{}({r}))({g})", k - 1),
        estimate: "exponent beyond 64 bits".into(),
        budget: word_budget,
    })?;
    Ok(apply_phi(&Word::letter(g), m, word_budget)?)
}

/// Exact area of `Δ^n_{ij}(w_k(r))`: `2·w_k(r)²` for `n ≥ 1`, `w_k(r)²` for the
/// unsubdivided product grid `Δ^0_{12}`.
pub fn delta_area(n: u32, k: u32, r: u64, table: &GrowthTable) -> Result<BigUint, GrowthError> {
    let m = table.w(k, r)?;
    let sq = &m * &m;
    Ok(if n == 0 { sq } else { sq * 2u32 })
}

/// Exact area of `Θ^n_i(w_k(r))`: two trapezoids `Σ_{j<s} L(j)` and a central
/// strip of `L(s)` cells with `s = w_k(r)`, i.e. `L(s + 1) − 2`.
pub fn theta_area(k: u32, r: u64, table: &GrowthTable) -> Result<BigUint, GrowthError> {
    let s = table.w(k, r)?;
    let s = num_traits::ToPrimitive::to_u64(&s).ok_or_else(|| GrowthError::BudgetExceeded {
        what: format!("area of Θ(w_{k}({r}))"),
        estimate: format!("L(w_{k}({r}) + 1) with w_{k}({r}) beyond 64 bits"),
        budget: table.bit_budget(),
    })?;
    Ok(phi_length_checked(s + 1, table.bit_budget())? - 2u32)
}

/// Builds `Δ^n_{ij}(w_k(r))`.
///
/// For `n ≥ 1` two triangular halves over `φ^M(a[n][i][1])`, `φ^M(a[n][j][1])`
/// are glued along `φ^M(u[n-1][1])` (`M = w_{k-1}(r)`, or `r`-th powers when
/// `k = 0`), with diagonal letters `d[n][·][s][t]`; area `2 w_k(r)²`. For `n = 0`
/// it is the product grid of `φ^M(a[0][1][1])` and `φ^M(a[0][2][1])`; area `w_k(r)²`.
pub fn build_delta(n: u32, i: u32, j: u32, k: u32, r: u64, cfg: &Config) -> Result<CellComplex, ComplexError> {
    if r == 0 {
        return Err(ComplexError::IndexOutOfRange("r must be at least 1".into()));
    }
    if n > cfg.max_level_depth {
        return Err(ComplexError::IndexOutOfRange(format!("level {n} beyond depth {}", cfg.max_level_depth)));
    }
    let count = 1u64 << n;
    let name = format!("Delta^{n}_{{{i}{j}}}(w_{k}({r}))");
    if n == 0 {
        if (i, j) != (1, 2) {
            return Err(ComplexError::IndexOutOfRange("Δ^0 is defined for (i, j) = (1, 2)".into()));
        }
    } else if i == 0 || j == 0 || i as u64 > count || j as u64 > count {
        return Err(ComplexError::IndexOutOfRange(format!("Δ^{n}_{{{i}{j}}} needs 1 ≤ i, j ≤ {count}")));
    }
    let m = side_length(k, r, &name, cfg.cell_budget)?;
    check_budget(&name, 2 * (m as u128) * (m as u128), cfg.cell_budget)?;
    let mut c = CellComplex::new(name, Topology::Disk);
    if n == 0 {
        let a1 = scaled_label(Gen::a(0, 1, 1), k, r, cfg.word_budget)?;
        let a2 = scaled_label(Gen::a(0, 2, 1), k, r, cfg.word_budget)?;
        let m = m as usize;
        let mut v = vec![vec![0usize; m + 1]; m + 1];
        for (y, row) in v.iter_mut().enumerate() {
            for (x, cell) in row.iter_mut().enumerate() {
                *cell = c.add_vertex_at(x as f64, y as f64);
            }
        }
        for y in 0..m {
            for x in 0..m {
                let (lx, ly) = (a1.letters()[x], a2.letters()[y]);
                c.add_face(&[v[y][x], v[y][x + 1], v[y + 1][x + 1], v[y + 1][x]], &[lx, ly, lx.inverse(), ly.inverse()]);
            }
        }
    } else {
        let u = scaled_label(Gen::u(n - 1, 1), k, r, cfg.word_budget)?;
        let ai = scaled_label(Gen::a(n, i, 1), k, r, cfg.word_budget)?;
        let aj = scaled_label(Gen::a(n, j, 1), k, r, cfg.word_budget)?;
        let m = m as usize;
        let u_path: Vec<usize> = (0..=m).map(|x| c.add_vertex_at(x as f64, 0.0)).collect();
        for (a, slot, sy) in [(&ai, i, 1.0), (&aj, j, -1.0)] {
            let mut a_path = vec![u_path[0]];
            for y in 1..=m {
                a_path.push(c.add_vertex_at(0.0, sy * y as f64));
            }
            triangle_patch(
                &mut c,
                &u_path,
                &a_path,
                u.letters(),
                a.letters(),
                |s, t| Gen::d(n, slot, s, t),
                Some((0.0, 0.0, sy)),
            );
        }
    }
    c.orient();
    Ok(c)
}

/// Builds `Θ^n_i(w_k(r))` in `K_{G_n}` (`1 ≤ i ≤ 2^{n+1}`).
///
/// With `ℓ = 𝓛_{n+2}(i + 2^{n+1})`, `ℓ' = 𝓛_{n+2}(i)` and side word
/// `S = φ^{w_{k-1}(r)}(u[n][1])` (`u[n][1]^r` when `k = 0`) of length `s = w_k(r)`:
/// a top trapezoid from `ℓ_1` to `φ^s(ℓ_1)`, a central strip commuting
/// `φ^s(ℓ_1)` with `ℓ'_1`, and a mirrored bottom trapezoid.
pub fn build_theta(n: u32, i: u32, k: u32, r: u64, cfg: &Config) -> Result<CellComplex, ComplexError> {
    if r == 0 {
        return Err(ComplexError::IndexOutOfRange("r must be at least 1".into()));
    }
    if n > cfg.max_level_depth {
        return Err(ComplexError::IndexOutOfRange(format!("level {n} beyond depth {}", cfg.max_level_depth)));
    }
    let half = 1u32 << (n + 1);
    if i == 0 || i > half {
        return Err(ComplexError::IndexOutOfRange(format!("Θ^{n}_{i} needs 1 ≤ i ≤ {half}")));
    }
    let name = format!("Theta^{n}_{i}(w_{k}({r}))");
    let s = side_length(k, r, &name, cfg.cell_budget)?;
    if s > 200 {
        return Err(ComplexError::BudgetExceeded { what: name, estimate: format!("L({s}) cells"), budget: cfg.cell_budget });
    }
    let area = crate::growth::phi_length(s + 1) - 2u32;
    let area_u = num_traits::ToPrimitive::to_u128(&area).unwrap_or(u128::MAX);
    check_budget(&name, area_u, cfg.cell_budget)?;
    let ell = l_entry(n + 2, i + half)?;
    let ell_p = l_entry(n + 2, i)?;
    let sigma = scaled_label(Gen::u(n, 1), k, r, cfg.word_budget)?;
    let g = ell.cell_gen(1);
    let rung = ell_p.cell_gen(1);
    let s = s as usize;

    let mut c = CellComplex::new(name, Topology::Disk);
    // Legs: left[t], right[t] for the top trapezoid (level t at height s + 1 + (s - t)),
    // and for the bottom one (level t at height s - t).
    let width = |t: usize| crate::growth::phi_length(t as u64).to_string().parse::<f64>().unwrap_or(1.0);
    let legs = |c: &mut CellComplex, h0: f64, up: bool| -> (Vec<usize>, Vec<usize>) {
        let mut l = Vec::new();
        let mut r_ = Vec::new();
        for t in 0..=s {
            let h = if up { h0 + (s - t) as f64 } else { h0 - (s - t) as f64 };
            let w = width(t);
            l.push(c.add_vertex_at(-w / 2.0, h));
            r_.push(c.add_vertex_at(w / 2.0, h));
        }
        (l, r_)
    };
    let (tl, tr) = legs(&mut c, 1.0, true);
    let (bl, br) = legs(&mut c, 0.0, false);
    let base_word = Word::letter(g);
    let top_mid = trapezoid_patch(&mut c, &[tl[0], tr[0]], &base_word, &tl, &tr, sigma.letters(), None, cfg.word_budget)?;
    let bot_mid = trapezoid_patch(&mut c, &[bl[0], br[0]], &base_word, &bl, &br, sigma.letters(), None, cfg.word_budget)?;
    let level_word = apply_phi(&base_word, s as u64, cfg.word_budget)?;
    strip_patch(&mut c, &bot_mid, &top_mid, level_word.letters(), rung);
    c.orient();
    Ok(c)
}

/// Builds a `length × 1` strip of `[side, rung]` cells.
pub fn build_strip(length: u64, side: Gen, rung: Gen, cfg: &Config) -> Result<CellComplex, ComplexError> {
    if length == 0 {
        return Err(ComplexError::IndexOutOfRange("strip length must be positive".into()));
    }
    check_budget("strip", length as u128, cfg.cell_budget)?;
    let mut c = CellComplex::new(format!("Strip({length})"), Topology::Disk);
    let w = vec![Letter::pos(side); length as usize];
    let bottom: Vec<usize> = (0..=length).map(|x| c.add_vertex_at(x as f64, 0.0)).collect();
    let top: Vec<usize> = (0..=length).map(|x| c.add_vertex_at(x as f64, 1.0)).collect();
    strip_patch(&mut c, &bottom, &top, &w, rung);
    c.orient();
    Ok(c)
}

/// Builds a disk with a single 2-cell labelled `label` (cyclically reduced first).
pub fn build_single_cell(label: &Word) -> Result<CellComplex, ComplexError> {
    let core = label.cyclic_reduce();
    if core.is_empty() {
        return Err(ComplexError::IndexOutOfRange("a 2-cell needs a nonempty label".into()));
    }
    let n = core.len();
    let mut c = CellComplex::new(format!("SingleCell({core})"), Topology::Disk);
    let vs: Vec<usize> = (0..n)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / n as f64;
            c.add_vertex_at(a.cos() * n as f64 / 3.0, a.sin() * n as f64 / 3.0)
        })
        .collect();
    c.add_face(&vs, core.letters());
    Ok(c)
}

/// Builds the slab `φ^{w_k(r)}(a[0][1][1]) × φ^{w_k(r)}(a[0][2][1]) × y[1]` as a
/// 3-complex with the product cell structure: `m²` cubes, `m = w_{k+1}(r)`.
pub fn build_slab(k: u32, r: u64, cfg: &Config) -> Result<CellComplex, ComplexError> {
    if r == 0 {
        return Err(ComplexError::IndexOutOfRange("r must be at least 1".into()));
    }
    let name = format!("Slab(w_{}({r}))", k + 1);
    let m = side_length(k + 1, r, &name, cfg.cell_budget)?;
    check_budget(&name, 4 * (m as u128 + 1) * (m as u128 + 1), cfg.cell_budget)?;
    let a1 = scaled_label(Gen::a(0, 1, 1), k + 1, r, cfg.word_budget)?;
    let a2 = scaled_label(Gen::a(0, 2, 1), k + 1, r, cfg.word_budget)?;
    let m = m as usize;
    let y = Letter::pos(Gen::y(1));
    let mut c = CellComplex::new(name, Topology::Ball);
    let mut v = vec![vec![vec![0usize; 2]; m + 1]; m + 1];
    for (x, plane) in v.iter_mut().enumerate() {
        for (yy, col) in plane.iter_mut().enumerate() {
            for (z, cell) in col.iter_mut().enumerate() {
                *cell = c.add_vertex_at(x as f64 + 0.3 * z as f64, yy as f64 + 0.3 * z as f64);
            }
        }
    }
    let (l1, l2) = (a1.letters(), a2.letters());
    let mut horiz: HashMap<(usize, usize, usize), usize> = HashMap::new();
    for z in 0..2 {
        for yy in 0..m {
            for x in 0..m {
                let f = c.add_face(
                    &[v[x][yy][z], v[x + 1][yy][z], v[x + 1][yy + 1][z], v[x][yy + 1][z]],
                    &[l1[x], l2[yy], l1[x].inverse(), l2[yy].inverse()],
                );
                horiz.insert((x, yy, z), f);
            }
        }
    }
    let mut xz: HashMap<(usize, usize), usize> = HashMap::new();
    for yy in 0..=m {
        for x in 0..m {
            let f = c.add_face(
                &[v[x][yy][0], v[x + 1][yy][0], v[x + 1][yy][1], v[x][yy][1]],
                &[l1[x], y, l1[x].inverse(), y.inverse()],
            );
            xz.insert((x, yy), f);
        }
    }
    let mut yz: HashMap<(usize, usize), usize> = HashMap::new();
    for x in 0..=m {
        for yy in 0..m {
            let f = c.add_face(
                &[v[x][yy][0], v[x][yy + 1][0], v[x][yy + 1][1], v[x][yy][1]],
                &[l2[yy], y, l2[yy].inverse(), y.inverse()],
            );
            yz.insert((x, yy), f);
        }
    }
    for yy in 0..m {
        for x in 0..m {
            c.add_cell3(vec![
                horiz[&(x, yy, 0)],
                horiz[&(x, yy, 1)],
                xz[&(x, yy)],
                xz[&(x, yy + 1)],
                yz[&(x, yy)],
                yz[&(x + 1, yy)],
            ]);
        }
    }
    Ok(c)
}

/// Builds any [`DiagramSpec`].
pub fn build(spec: &DiagramSpec, cfg: &Config) -> Result<CellComplex, ComplexError> {
    match spec {
        DiagramSpec::Delta { n, i, j, k, r } => build_delta(*n, *i, *j, *k, *r, cfg),
        DiagramSpec::Theta { n, i, k, r } => build_theta(*n, *i, *k, *r, cfg),
        DiagramSpec::Slab { k, r } => build_slab(*k, *r, cfg),
        DiagramSpec::Strip { length, side, rung } => build_strip(*length, *side, *rung, cfg),
        DiagramSpec::SingleCell { label } => build_single_cell(label),
    }
}
