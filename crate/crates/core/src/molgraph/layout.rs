use std::collections::VecDeque;
use std::f64::consts::PI;

use crate::geometry::Point;

use super::canon::canonical_ranks;
use super::rings::{bridges, ring_systems, sssr};
use super::{BondOrder, MolecularGraph};

/// Coordinates produced by [`generate_2d_coords`] plus quality measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutReport {
    pub graph: MolecularGraph,
    /// True when two unbonded atoms are closer than 0.5 or a bond length
    /// leaves the 0.8–1.2 band.
    pub overlap: bool,
    pub min_nonbonded_distance: f64,
    pub max_bond_deviation: f64,
}

const MIN_SEPARATION: f64 = 0.5;
const CLASH_DISTANCE: f64 = 0.9;
const COMPONENT_GAP: f64 = 1.5;

/// Deterministic 2D depiction with unit bond length.
///
/// Ring systems are built from regular polygons and attached rigidly; chains
/// zigzag at 120°; clashes are repaired by reflecting and rotating the
/// smaller side of acyclic bonds.
pub fn generate_2d_coords(graph: &MolecularGraph) -> LayoutReport {
    let mut out = graph.clone();
    let n = graph.atom_count();
    if n == 0 {
        return LayoutReport {
            graph: out,
            overlap: false,
            min_nonbonded_distance: f64::INFINITY,
            max_bond_deviation: 0.0,
        };
    }
    let ranks = canonical_ranks(graph);
    let adj = graph.adjacency();
    let rings = sssr(graph);
    let systems = ring_systems(&rings);
    let mut system_of = vec![usize::MAX; n];
    for (s, members) in systems.iter().enumerate() {
        for &r in members {
            for &a in &rings[r] {
                system_of[a] = s;
            }
        }
    }

    let mut ctx = Layout {
        graph,
        adj: &adj,
        ranks: &ranks,
        rings: &rings,
        systems: &systems,
        system_of: &system_of,
        pos: vec![None; n],
        turn: vec![1.0; n],
    };

    let mut components = graph.components();
    components.sort_by_key(|c| c.iter().map(|&i| ranks[i]).min());
    let mut cursor_x = 0.0;
    for (k, comp) in components.iter().enumerate() {
        ctx.layout_component(comp);
        ctx.repair_clashes(comp);
        if k > 0 || components.len() > 1 {
            let pts: Vec<Point> = comp.iter().map(|&i| ctx.pos[i].expect("placed")).collect();
            let min_x = pts.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
            let max_x = pts.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
            let mid_y = (pts.iter().map(|p| p.y).fold(f64::INFINITY, f64::min)
                + pts.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max))
                / 2.0;
            let shift = Point::new(cursor_x - min_x, -mid_y);
            for &i in comp {
                ctx.pos[i] = ctx.pos[i].map(|p| p + shift);
            }
            cursor_x += max_x - min_x + COMPONENT_GAP;
        }
    }

    for (i, p) in ctx.pos.iter().enumerate() {
        out.set_coord(i, clean(p.expect("every atom placed")));
    }
    measure(out)
}

fn clean(p: Point) -> Point {
    let fix = |v: f64| if v.abs() < 1e-12 { 0.0 } else { v };
    Point::new(fix(p.x), fix(p.y))
}

fn measure(graph: MolecularGraph) -> LayoutReport {
    let pts = graph.coords().expect("coords set");
    let n = pts.len();
    let mut bonded = vec![vec![false; n]; n];
    let mut max_dev: f64 = 0.0;
    for b in graph.bonds() {
        bonded[b.a][b.b] = true;
        bonded[b.b][b.a] = true;
        max_dev = max_dev.max((pts[b.a].distance(pts[b.b]) - 1.0).abs());
    }
    let mut min_d = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            if !bonded[i][j] {
                min_d = min_d.min(pts[i].distance(pts[j]));
            }
        }
    }
    LayoutReport {
        overlap: min_d < MIN_SEPARATION || max_dev > 0.2 + 1e-9,
        graph,
        min_nonbonded_distance: min_d,
        max_bond_deviation: max_dev,
    }
}

struct Layout<'a> {
    graph: &'a MolecularGraph,
    adj: &'a [Vec<(usize, usize)>],
    ranks: &'a [usize],
    rings: &'a [Vec<usize>],
    systems: &'a [Vec<usize>],
    system_of: &'a [usize],
    pos: Vec<Option<Point>>,
    turn: Vec<f64>,
}

impl Layout<'_> {
    fn layout_component(&mut self, comp: &[usize]) {
        let mut queue = VecDeque::new();
        // Root: the largest ring system if any, otherwise the lowest-ranked atom.
        let root_system = comp
            .iter()
            .filter(|&&a| self.system_of[a] != usize::MAX)
            .map(|&a| self.system_of[a])
            .max_by_key(|&s| {
                let size = self.system_atoms(s).len();
                let best = self
                    .system_atoms(s)
                    .iter()
                    .map(|&a| self.ranks[a])
                    .min()
                    .unwrap_or(0);
                (size, std::cmp::Reverse(best))
            });
        if let Some(s) = root_system {
            let local = self.build_system(s);
            for (a, p) in local {
                self.pos[a] = Some(p);
            }
            for a in self.sorted_by_rank(self.system_atoms(s)) {
                queue.push_back(a);
            }
        } else {
            let root = *comp.iter().min_by_key(|&&a| self.ranks[a]).expect("non-empty");
            self.pos[root] = Some(Point::ORIGIN);
            queue.push_back(root);
        }

        while let Some(u) = queue.pop_front() {
            let pu = self.pos[u].expect("queued atoms are placed");
            let mut todo: Vec<usize> = self.adj[u]
                .iter()
                .map(|&(w, _)| w)
                .filter(|&w| self.pos[w].is_none())
                .collect();
            if todo.is_empty() {
                continue;
            }
            todo.sort_by_key(|&w| self.ranks[w]);
            let placed: Vec<usize> = self.adj[u]
                .iter()
                .map(|&(w, _)| w)
                .filter(|&w| self.pos[w].is_some())
                .collect();
            let dirs = self.child_directions(u, &placed, todo.len());
            for (&w, (angle, turn)) in todo.iter().zip(dirs) {
                let dir = Point::from_angle(angle);
                let pw = pu + dir;
                if self.system_of[w] != usize::MAX {
                    self.attach_system(self.system_of[w], w, pw, pu);
                    for a in self.sorted_by_rank(self.system_atoms(self.system_of[w])) {
                        queue.push_back(a);
                    }
                } else {
                    self.pos[w] = Some(pw);
                    self.turn[w] = turn;
                    queue.push_back(w);
                }
            }
        }
    }

    fn sorted_by_rank(&self, mut atoms: Vec<usize>) -> Vec<usize> {
        atoms.sort_by_key(|&a| self.ranks[a]);
        atoms
    }

    fn system_atoms(&self, s: usize) -> Vec<usize> {
        let mut atoms: Vec<usize> = self.systems[s]
            .iter()
            .flat_map(|&r| self.rings[r].iter().copied())
            .collect();
        atoms.sort_unstable();
        atoms.dedup();
        atoms
    }

    fn is_linear(&self, u: usize) -> bool {
        let mut doubles = 0;
        for &(_, b) in &self.adj[u] {
            match self.graph.bonds()[b].order {
                BondOrder::Triple => return true,
                BondOrder::Double => doubles += 1,
                _ => {}
            }
        }
        doubles >= 2 && self.adj[u].len() == 2
    }

    /// Angles (radians) and zigzag turn signs for `k` new neighbors of `u`.
    fn child_directions(&self, u: usize, placed: &[usize], k: usize) -> Vec<(f64, f64)> {
        let pu = self.pos[u].expect("placed");
        if placed.is_empty() {
            let start = PI / 6.0;
            return match k {
                1 => vec![(start, -1.0)],
                2 => vec![(start, -1.0), (start + 2.0 * PI / 3.0, 1.0)],
                _ => (0..k)
                    .map(|i| (start + 2.0 * PI * i as f64 / k as f64, 1.0))
                    .collect(),
            };
        }
        if placed.len() == 1 && self.system_of[u] == usize::MAX {
            let base = (pu - self.pos[placed[0]].expect("placed")).angle();
            let t = self.turn[u];
            if self.is_linear(u) && k == 1 {
                return vec![(base, t)];
            }
            let sixty = PI / 3.0;
            return match k {
                1 => vec![(base + t * sixty, -t)],
                2 => vec![(base + t * sixty, -t), (base - t * sixty, t)],
                3 => vec![
                    (base + t * PI / 2.0, -t),
                    (base, t),
                    (base - t * PI / 2.0, t),
                ],
                _ => (0..k)
                    .map(|i| (base + PI + 2.0 * PI * (i + 1) as f64 / (k + 1) as f64, t))
                    .collect(),
            };
        }
        // Spread new neighbors evenly over the widest free angular gap.
        let mut angles: Vec<f64> = placed
            .iter()
            .map(|&w| (self.pos[w].expect("placed") - pu).angle())
            .collect();
        angles.sort_by(f64::total_cmp);
        let mut best = (0.0, angles[0]);
        for i in 0..angles.len() {
            let a = angles[i];
            let b = if i + 1 < angles.len() {
                angles[i + 1]
            } else {
                angles[0] + 2.0 * PI
            };
            if b - a > best.0 + 1e-9 {
                best = (b - a, a);
            }
        }
        let (gap, from) = best;
        (0..k)
            .map(|i| (from + gap * (i + 1) as f64 / (k + 1) as f64, 1.0))
            .collect()
    }

    /// Local coordinates of a ring system, first ring centered on the origin.
    fn build_system(&self, s: usize) -> Vec<(usize, Point)> {
        let n = self.graph.atom_count();
        let mut local: Vec<Option<Point>> = vec![None; n];
        let mut ring_done = vec![false; self.rings.len()];
        let members = &self.systems[s];
        loop {
            let next = members
                .iter()
                .copied()
                .filter(|&r| !ring_done[r])
                .max_by_key(|&r| {
                    let placed = self.rings[r].iter().filter(|&&a| local[a].is_some()).count();
                    (placed, std::cmp::Reverse(r))
                });
            let Some(r) = next else { break };
            ring_done[r] = true;
            let ring = self.oriented_ring(r);
            let placed_count = ring.iter().filter(|&&a| local[a].is_some()).count();
            if placed_count == 0 {
                let m = ring.len();
                let radius = 0.5 / (PI / m as f64).sin();
                for (i, &a) in ring.iter().enumerate() {
                    let angle = PI / 2.0 + 2.0 * PI * i as f64 / m as f64;
                    local[a] = Some(Point::from_angle(angle) * radius);
                }
                continue;
            }
            if placed_count == ring.len() {
                continue;
            }
            if placed_count == 1 {
                let k = ring.iter().position(|&a| local[a].is_some()).expect("one placed");
                let p = local[ring[k]].expect("placed");
                let nb: Vec<Point> = self.adj[ring[k]]
                    .iter()
                    .filter_map(|&(w, _)| local[w])
                    .collect();
                let away = Point::centroid(&nb);
                let dir = (p - away).normalized().unwrap_or(Point::new(1.0, 0.0));
                let m = ring.len();
                let radius = 0.5 / (PI / m as f64).sin();
                let center = p + dir * radius;
                let start = (p - center).angle();
                for i in 1..m {
                    let angle = start + 2.0 * PI * i as f64 / m as f64;
                    local[ring[(k + i) % m]] = Some(center + Point::from_angle(angle) * radius);
                }
                continue;
            }
            // Fill each run of unplaced atoms with an arc between its placed ends.
            let m = ring.len();
            let start = (0..m)
                .find(|&i| local[ring[i]].is_some() && local[ring[(i + 1) % m]].is_none());
            let Some(start) = start else { continue };
            let mut i = start;
            let mut visited = 0;
            while visited < m {
                if local[ring[i]].is_some() && local[ring[(i + 1) % m]].is_none() {
                    let mut run = Vec::new();
                    let mut j = (i + 1) % m;
                    while local[ring[j]].is_none() {
                        run.push(ring[j]);
                        j = (j + 1) % m;
                    }
                    let p = local[ring[i]].expect("placed");
                    let q = local[ring[j]].expect("placed");
                    let away = self.away_point(ring[i], ring[j], &local, members, &ring_done, r);
                    let pts = arc_between(p, q, run.len(), away);
                    for (a, pt) in run.iter().zip(pts) {
                        local[*a] = Some(pt);
                    }
                    visited += run.len() + 1;
                    i = j;
                } else {
                    i = (i + 1) % m;
                    visited += 1;
                }
            }
        }
        self.system_atoms(s)
            .into_iter()
            .map(|a| (a, local[a].expect("system atom placed")))
            .collect()
    }

    /// Centroid of the already-placed rings through both endpoints, used as
    /// the side a new ring must avoid.
    fn away_point(
        &self,
        p: usize,
        q: usize,
        local: &[Option<Point>],
        members: &[usize],
        done: &[bool],
        current: usize,
    ) -> Point {
        let mut pts = Vec::new();
        for &r in members {
            if r == current || !done[r] {
                continue;
            }
            let ring = &self.rings[r];
            if ring.contains(&p) && ring.contains(&q) {
                pts.extend(ring.iter().filter_map(|&a| local[a]));
            }
        }
        if pts.is_empty() {
            for &r in members {
                if r != current && done[r] {
                    pts.extend(self.rings[r].iter().filter_map(|&a| local[a]));
                }
            }
        }
        Point::centroid(&pts)
    }

    /// Ring atoms starting at the lowest-ranked atom, walking toward its
    /// lower-ranked ring neighbor.
    fn oriented_ring(&self, r: usize) -> Vec<usize> {
        let ring = &self.rings[r];
        let m = ring.len();
        let k = (0..m).min_by_key(|&i| self.ranks[ring[i]]).expect("non-empty");
        let fwd = self.ranks[ring[(k + 1) % m]];
        let back = self.ranks[ring[(k + m - 1) % m]];
        (0..m)
            .map(|i| {
                if fwd <= back {
                    ring[(k + i) % m]
                } else {
                    ring[(k + m - i) % m]
                }
            })
            .collect()
    }

    /// Places ring system `s` so that atom `w` sits at `pw` with its outward
    /// direction pointing back at the parent position `pu`.
    fn attach_system(&mut self, s: usize, w: usize, pw: Point, pu: Point) {
        let local = self.build_system(s);
        let lw = local.iter().find(|(a, _)| *a == w).expect("member").1;
        let ring_nb: Vec<Point> = self.adj[w]
            .iter()
            .filter_map(|&(x, _)| local.iter().find(|(a, _)| *a == x).map(|(_, p)| *p))
            .collect();
        let inward = Point::centroid(&ring_nb);
        let all: Vec<Point> = local.iter().map(|(_, p)| *p).collect();
        let outward = (lw - inward)
            .normalized()
            .or_else(|| (lw - Point::centroid(&all)).normalized())
            .unwrap_or(Point::new(1.0, 0.0));
        let target = (pu - pw).normalized().unwrap_or(Point::new(-1.0, 0.0));
        let mut best: Option<(f64, Vec<(usize, Point)>)> = None;
        for mirror in [false, true] {
            let flip = |p: Point| if mirror { Point::new(p.x, -p.y) } else { p };
            let out_dir = flip(outward);
            let rot = target.angle() - out_dir.angle();
            let placed: Vec<(usize, Point)> = local
                .iter()
                .map(|&(a, p)| (a, (flip(p) - flip(lw)).rotated(rot) + pw))
                .collect();
            let score = self.clash_score_with(&placed);
            if best.as_ref().is_none_or(|(b, _)| score < *b - 1e-9) {
                best = Some((score, placed));
            }
        }
        for (a, p) in best.expect("two candidates").1 {
            self.pos[a] = Some(p);
        }
    }

    fn clash_score_with(&self, extra: &[(usize, Point)]) -> f64 {
        let mut score = 0.0;
        for &(a, p) in extra {
            for (b, q) in self.pos.iter().enumerate() {
                if let Some(q) = q {
                    if b != a && !extra.iter().any(|(x, _)| *x == b) {
                        score += penalty(p.distance(*q));
                    }
                }
            }
        }
        score
    }

    fn total_clash(&self, comp: &[usize], bonded: &[Vec<bool>]) -> f64 {
        let mut score = 0.0;
        for (x, &i) in comp.iter().enumerate() {
            for &j in &comp[x + 1..] {
                if !bonded[i][j] {
                    score += penalty(self.pos[i].expect("placed").distance(self.pos[j].expect("placed")));
                }
            }
        }
        score
    }

    fn repair_clashes(&mut self, comp: &[usize]) {
        let n = self.graph.atom_count();
        let mut bonded = vec![vec![false; n]; n];
        for b in self.graph.bonds() {
            bonded[b.a][b.b] = true;
            bonded[b.b][b.a] = true;
        }
        let mut score = self.total_clash(comp, &bonded);
        if score == 0.0 {
            return;
        }
        let bridge = bridges(self.graph);
        let mut candidates: Vec<usize> = (0..self.graph.bond_count())
            .filter(|&b| bridge[b] && comp.contains(&self.graph.bonds()[b].a))
            .collect();
        candidates.sort_by_key(|&b| {
            let bd = self.graph.bonds()[b];
            let (x, y) = (self.ranks[bd.a], self.ranks[bd.b]);
            (x.min(y), x.max(y))
        });
        for _pass in 0..8 {
            let mut improved = false;
            for &b in &candidates {
                let bond = self.graph.bonds()[b];
                let side_b = self.side(bond.b, b);
                let (pivot, moving) = if side_b.len() * 2 <= comp.len() {
                    (bond.a, side_b)
                } else {
                    (bond.b, self.side(bond.a, b))
                };
                let anchor = bond.other(pivot);
                let p = self.pos[pivot].expect("placed");
                let axis = (self.pos[anchor].expect("placed") - p).angle();
                let saved: Vec<Point> = moving.iter().map(|&a| self.pos[a].expect("placed")).collect();
                let mut transforms: Vec<Box<dyn Fn(Point) -> Point>> = Vec::new();
                transforms.push(Box::new(move |q: Point| {
                    let local = (q - p).rotated(-axis);
                    Point::new(local.x, -local.y).rotated(axis) + p
                }));
                for deg in [30.0f64, -30.0, 60.0, -60.0, 90.0, -90.0] {
                    let t = deg.to_radians();
                    transforms.push(Box::new(move |q: Point| (q - p).rotated(t) + p));
                }
                for t in &transforms {
                    for (&a, &q) in moving.iter().zip(&saved) {
                        self.pos[a] = Some(t(q));
                    }
                    let s = self.total_clash(comp, &bonded);
                    if s < score - 1e-9 {
                        score = s;
                        improved = true;
                        break;
                    }
                    for (&a, &q) in moving.iter().zip(&saved) {
                        self.pos[a] = Some(q);
                    }
                }
                if score == 0.0 {
                    return;
                }
            }
            if !improved {
                break;
            }
        }
    }

    /// Atoms reachable from `start` without crossing `bond`.
    fn side(&self, start: usize, bond: usize) -> Vec<usize> {
        let mut seen = vec![false; self.graph.atom_count()];
        seen[start] = true;
        let mut out = vec![start];
        let mut k = 0;
        while k < out.len() {
            for &(w, b) in &self.adj[out[k]] {
                if b != bond && !seen[w] {
                    seen[w] = true;
                    out.push(w);
                }
            }
            k += 1;
        }
        out
    }
}

fn penalty(d: f64) -> f64 {
    if d < CLASH_DISTANCE {
        (CLASH_DISTANCE - d).powi(2)
    } else {
        0.0
    }
}

/// `k` points on a circular arc from `p` to `q` with unit chords, bulging
/// away from `away`. Falls back to evenly stretched points when the gap is
/// too wide for unit bonds.
fn arc_between(p: Point, q: Point, k: usize, away: Point) -> Vec<Point> {
    let steps = (k + 1) as f64;
    let d = p.distance(q);
    if steps <= d + 1e-9 {
        return (1..=k).map(|i| p + (q - p) * (i as f64 / steps)).collect();
    }
    let sweep = |r: f64| steps * 2.0 * (0.5 / r).min(1.0).asin();
    let minor = |r: f64| 2.0 * (d / (2.0 * r)).min(1.0).asin();
    let r0 = d.max(1.0) / 2.0;
    let major = sweep(r0) >= 2.0 * PI - minor(r0);
    let f = |r: f64| {
        if major {
            sweep(r) - (2.0 * PI - minor(r))
        } else {
            sweep(r) - minor(r)
        }
    };
    let (mut lo, mut hi) = (r0, r0.max(1.0) * 64.0);
    for _ in 0..200 {
        let mid = (lo + hi) / 2.0;
        let fm = f(mid);
        // Major: f decreases with r. Minor: f increases with r.
        if (fm > 0.0) == major {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = (lo + hi) / 2.0;
    let step = 2.0 * (0.5 / r).min(1.0).asin();
    let mid = (p + q) * 0.5;
    let h = (r * r - d * d / 4.0).max(0.0).sqrt();
    let normal = (q - p).rotated(PI / 2.0).normalized().unwrap_or(Point::new(0.0, 1.0));
    let away_side = if (away - mid).dot(normal) > 0.0 { -1.0 } else { 1.0 };
    // The arc bulges toward `away_side`; a major arc has its center on that
    // side, a minor arc on the opposite side.
    let center = if major {
        mid + normal * (h * away_side)
    } else {
        mid - normal * (h * away_side)
    };
    let start = (p - center).angle();
    let mut best: Option<(f64, Vec<Point>)> = None;
    for sign in [1.0, -1.0] {
        let pts: Vec<Point> = (1..=k)
            .map(|i| center + Point::from_angle(start + sign * step * i as f64) * r)
            .collect();
        let end = center + Point::from_angle(start + sign * step * steps) * r;
        let bulge = Point::centroid(&pts) - mid;
        let score = end.distance(q) - 0.01 * bulge.dot(normal * away_side);
        if best.as_ref().is_none_or(|(b, _)| score < *b) {
            best = Some((score, pts));
        }
    }
    best.expect("two candidates").1
}
