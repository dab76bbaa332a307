//! Twisted 2×2p grid diagrams for the lift of `T(2, p)` to `L(p, 1)`.
//!
//! Geometry. The grid lives in the plane modulo the lattice spanned by
//! `(2p, 0)` and `(2, 2)`: columns wrap after `2p`, and the top edge is
//! glued to the bottom with a shift of two columns. A generator has one
//! component on each horizontal curve: `u0 ∈ Z/2p` on the bottom curve and
//! `u1 ∈ Z/2p` on the top one, with `u0`, `u1` of opposite parity. The
//! `x` generators have `u0` even, the `y` generators `u0` odd, and the
//! coordinates are `(a0, a1) = (u0 div 2, u1 div 2)`.
//!
//! Markings are squares `(column, row)`: `O0 = (0, 0)`, `O1 = (1, 1)`,
//! `X0 = (p, 0)`, `X1 = (p + 1, 1)`.

use crate::complex::{ComplexError, Generator, GradingSlice, KnotComplex, LabeledGraph};
use crate::exec::Exec;
use crate::rational::{q, Q};
use std::collections::{BTreeMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("p must be odd and at least 3, got {0}")]
    BadP(i64),
    #[error("spin^c label {h} out of range for p = {p}")]
    SpincRange { p: i64, h: i64 },
    #[error("relative gradings do not reach every generator of class {h}")]
    DisconnectedSlice { h: i64 },
    #[error("rectangles give inconsistent gradings in class {h}")]
    InconsistentGradings { h: i64 },
    #[error("no homology tower matches both filtrations in class {h}")]
    NoTower { h: i64 },
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridGenerator {
    pub kind: Kind,
    pub a0: i64,
    pub a1: i64,
}

impl GridGenerator {
    pub fn from_points(u0: i64, u1: i64) -> Self {
        debug_assert!((u0 - u1) % 2 != 0);
        GridGenerator {
            kind: if u0 % 2 == 0 { Kind::X } else { Kind::Y },
            a0: u0 / 2,
            a1: u1 / 2,
        }
    }

    /// Positions `(u0, u1)` of the two components.
    pub fn points(&self) -> (i64, i64) {
        match self.kind {
            Kind::X => (2 * self.a0, 2 * self.a1 + 1),
            Kind::Y => (2 * self.a0 + 1, 2 * self.a1),
        }
    }

    pub fn name(&self) -> String {
        let k = match self.kind {
            Kind::X => 'x',
            Kind::Y => 'y',
        };
        format!("{k}{},{}", self.a0, self.a1)
    }
}

/// Symmetric representative of `a0 + a1 mod p`.
pub fn spinc_of(g: &GridGenerator, p: i64) -> i64 {
    let h = (g.a0 + g.a1).rem_euclid(p);
    if h > p / 2 {
        h - p
    } else {
        h
    }
}

/// One rectangle: `V0^o0 V1^o1 · to`, crossing `x` X-markings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridArrow {
    pub from: GridGenerator,
    pub to: GridGenerator,
    pub o0: u32,
    pub o1: u32,
    pub x: u32,
}

type Point = (i64, i64);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorClass {
    /// Outgoing rectangles avoid the O markings.
    Plain,
    /// Outgoing rectangles pick up `V` factors.
    Decorated,
    /// A component sits on the lower-left corner of a marked square.
    Sporadic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TwistedGrid {
    p: i64,
}

impl TwistedGrid {
    pub fn new(p: i64) -> Result<Self, GridError> {
        if p < 3 || p % 2 == 0 {
            return Err(GridError::BadP(p));
        }
        Ok(TwistedGrid { p })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn o_squares(&self) -> [(i64, i64); 2] {
        [(0, 0), (1, 1)]
    }

    pub fn x_squares(&self) -> [(i64, i64); 2] {
        [(self.p, 0), (self.p + 1, 1)]
    }

    pub fn generators(&self) -> Vec<GridGenerator> {
        let w = 2 * self.p;
        let mut out = Vec::new();
        for u0 in 0..w {
            for u1 in 0..w {
                if (u0 + u1) % 2 == 1 {
                    out.push(GridGenerator::from_points(u0, u1));
                }
            }
        }
        out.sort();
        out
    }

    pub fn check_spinc(&self, h: i64) -> Result<(), GridError> {
        if h.abs() > (self.p - 1) / 2 {
            return Err(GridError::SpincRange { p: self.p, h });
        }
        Ok(())
    }

    fn marks(&self, squares: &[(i64, i64)]) -> (u32, u32, u32) {
        let w = 2 * self.p;
        let count = |m: (i64, i64)| {
            squares
                .iter()
                .filter(|s| (s.0.rem_euclid(w), s.1) == m)
                .count() as u32
        };
        let [o0, o1] = self.o_squares();
        let [x0, x1] = self.x_squares();
        (count(o0), count(o1), count(x0) + count(x1))
    }

    /// The (at most four) rectangles leaving `g`, as target points and the
    /// squares they cover.
    fn candidates(&self, g: &GridGenerator) -> Vec<(Point, Vec<Point>)> {
        let p = self.p;
        let w = 2 * p;
        let (u0, u1) = g.points();
        let md = |v: i64| v.rem_euclid(w);
        let mut res = Vec::new();
        // one row high, along the bottom row
        let len = md(u1 - u0);
        res.push(((u1, u0), (0..len).map(|i| (u0 + i, 0)).collect()));
        // one row high, along the top row
        let len = md(u0 + 2 - u1);
        res.push((
            (md(u1 - 2), md(u0 + 2)),
            (0..len).map(|i| (u1 + i, 1)).collect(),
        ));
        // one column wide, starting on the bottom curve
        let k = (u0 + 1 - u1).div_euclid(2).rem_euclid(p);
        if k != 0 {
            let sq = (0..1 + 2 * k).map(|l| (u0 - 2 * (l / 2), l % 2)).collect();
            res.push(((md(u0 + 1), md(u0 - 2 * k)), sq));
        }
        // one column wide, starting on the top curve
        let mut k = (u1 + 1 - u0).div_euclid(2).rem_euclid(p);
        if k == 0 {
            k = p;
        }
        if k != 1 {
            let sq = (1..2 * k).map(|l| (u1 - 2 * (l / 2), l % 2)).collect();
            res.push(((md(u1 - 2 * k), md(u1 + 1)), sq));
        }
        res
    }

    /// Closed-form rectangle list; `full` keeps rectangles through X.
    pub fn closed_form(&self, full: bool) -> Vec<GridArrow> {
        let mut out = Vec::new();
        for g in self.generators() {
            for ((t0, t1), sq) in self.candidates(&g) {
                let (o0, o1, x) = self.marks(&sq);
                if x > 0 && !full {
                    continue;
                }
                out.push(GridArrow {
                    from: g,
                    to: GridGenerator::from_points(t0, t1),
                    o0,
                    o1,
                    x,
                });
            }
        }
        out.sort();
        out
    }

    /// Lattice translates of the doubled point `pt` strictly inside the
    /// doubled box.
    fn lifts_inside(&self, pt: (i64, i64), b: (i64, i64, i64, i64)) -> u32 {
        // translates are pt + (4p m + 4k, 4k)
        let p4 = 4 * self.p;
        let mut n = 0;
        let klo = (b.2 - pt.1).div_euclid(4) - 1;
        let khi = (b.3 - pt.1).div_euclid(4) + 1;
        for k in klo..=khi {
            let y = pt.1 + 4 * k;
            if y <= b.2 || y >= b.3 {
                continue;
            }
            let x = pt.0 + 4 * k;
            let mlo = (b.0 - x).div_euclid(p4) - 1;
            let mhi = (b.1 - x).div_euclid(p4) + 1;
            n += (mlo..=mhi)
                .filter(|m| {
                    let xx = x + p4 * m;
                    b.0 < xx && xx < b.1
                })
                .count() as u32;
        }
        n
    }

    /// Rectangles found by enumerating lifts to the plane: the lower-left
    /// corner is one component, the upper-right corner a lift of the other.
    /// Rectangles must be empty and embed in the torus.
    pub fn enumerate_rectangles(&self, full: bool) -> Vec<GridArrow> {
        let p = self.p;
        let w = 2 * p;
        let mut out = Vec::new();
        for g in self.generators() {
            let (u0, u1) = g.points();
            let comps = [(u0, 0), (u1, 1)];
            for ci in 0..2 {
                let c = comps[ci];
                let other = comps[1 - ci];
                for k in -2 * p - 2..=2 * p + 2 {
                    for m in -3..=3 {
                        let qx = other.0 + w * m + 2 * k;
                        let qy = other.1 + 2 * k;
                        let (wd, ht) = (qx - c.0, qy - c.1);
                        if wd <= 0 || ht <= 0 || wd > w || ht > 4 * p {
                            continue;
                        }
                        if !self.embeds(wd, ht) {
                            continue;
                        }
                        let b = (2 * c.0, 2 * qx, 2 * c.1, 2 * qy);
                        if comps
                            .iter()
                            .any(|&pt| self.lifts_inside((2 * pt.0, 2 * pt.1), b) > 0)
                        {
                            continue;
                        }
                        let cnt =
                            |sq: (i64, i64)| self.lifts_inside((2 * sq.0 + 1, 2 * sq.1 + 1), b);
                        let [o0, o1] = self.o_squares();
                        let [x0, x1] = self.x_squares();
                        let x = cnt(x0) + cnt(x1);
                        if x > 0 && !full {
                            continue;
                        }
                        let mut new = [0i64; 2];
                        for (px, py) in [(c.0, qy), (qx, c.1)] {
                            let s = py.div_euclid(2);
                            new[(py - 2 * s) as usize] = (px - 2 * s).rem_euclid(w);
                        }
                        out.push(GridArrow {
                            from: g,
                            to: GridGenerator::from_points(new[0], new[1]),
                            o0: cnt(o0),
                            o1: cnt(o1),
                            x,
                        });
                    }
                }
            }
        }
        out.sort();
        out
    }

    /// No nonzero lattice vector fits inside a `wd × ht` rectangle.
    fn embeds(&self, wd: i64, ht: i64) -> bool {
        let w = 2 * self.p;
        for k in -(ht / 2 + 1)..=(ht / 2 + 1) {
            for m in -2..=2 {
                let (vx, vy) = (w * m + 2 * k, 2 * k);
                if (vx, vy) != (0, 0) && vx.abs() < wd && vy.abs() < ht {
                    return false;
                }
            }
        }
        true
    }

    pub fn classify(&self, g: &GridGenerator) -> GeneratorClass {
        let p = self.p;
        let (u0, u1) = g.points();
        if u0 == 0 || u0 == p || u1 == 1 || u1 == p + 1 {
            return GeneratorClass::Sporadic;
        }
        let decorated = self.candidates(g).into_iter().any(|(_, sq)| {
            let (o0, o1, x) = self.marks(&sq);
            x == 0 && o0 + o1 > 0
        });
        if decorated {
            GeneratorClass::Decorated
        } else {
            GeneratorClass::Plain
        }
    }

    /// Generators with a component on the lower-left corner of a marked
    /// square, within class `h`.
    pub fn sporadic_generators(&self, h: i64) -> Vec<GridGenerator> {
        self.generators()
            .into_iter()
            .filter(|g| spinc_of(g, self.p) == h && self.classify(g) == GeneratorClass::Sporadic)
            .collect()
    }
}

pub fn build_torus_grid(p: i64) -> Result<TwistedGrid, GridError> {
    TwistedGrid::new(p)
}

/// X-avoiding differential by rectangle enumeration.
pub fn rect_differential(g: &TwistedGrid) -> Vec<GridArrow> {
    g.enumerate_rectangles(false)
}

/// X-avoiding differential from the closed-form case analysis.
pub fn closed_form_differential(g: &TwistedGrid) -> Vec<GridArrow> {
    g.closed_form(false)
}

/// Outcome of comparing the two differentials and checking each slice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossCheck {
    pub x_free_arrows: usize,
    pub full_arrows: usize,
    /// Enumeration and closed form agree, with and without X.
    pub agree: bool,
    pub max_out: usize,
    /// `(h, violations)` for slices failing validation.
    pub bad_slices: Vec<(i64, usize)>,
}

impl CrossCheck {
    pub fn ok(&self) -> bool {
        self.agree && self.max_out <= 2 && self.bad_slices.is_empty()
    }
}

pub fn cross_check(g: &TwistedGrid, exec: Exec) -> Result<CrossCheck, GridError> {
    let (ra, ca) = (rect_differential(g), closed_form_differential(g));
    let (rf, cf) = (g.enumerate_rectangles(true), g.closed_form(true));
    let mut out: BTreeMap<GridGenerator, usize> = BTreeMap::new();
    for a in &ca {
        *out.entry(a.from).or_default() += 1;
    }
    let n = (g.p() - 1) / 2;
    let hs: Vec<i64> = (-n..=n).collect();
    let slices = exec.map(&hs, |&h| spinc_slice(g, h).map(|k| (h, k.validate().len())));
    let mut bad_slices = Vec::new();
    for s in slices {
        let (h, v) = s?;
        if v > 0 {
            bad_slices.push((h, v));
        }
    }
    Ok(CrossCheck {
        x_free_arrows: ca.len(),
        full_arrows: cf.len(),
        agree: ra == ca && rf == cf,
        max_out: out.values().copied().max().unwrap_or(0),
        bad_slices,
    })
}

/// One spin^c class of the grid complex with relative gradings in the
/// grid's own orientation.
#[derive(Clone, Debug)]
pub struct GridSlice {
    pub p: i64,
    pub h: i64,
    pub generators: Vec<GridGenerator>,
    /// All rectangles, including those through X.
    pub arrows: Vec<(usize, usize, u32, u32, u32)>,
    pub alexander: Vec<i64>,
    pub maslov: Vec<i64>,
}

/// Relative gradings along every rectangle: `A` moves by `#O - #X` and
/// `M` by `2#O - 1`.
pub fn assign_gradings(grid: &TwistedGrid, h: i64) -> Result<GridSlice, GridError> {
    grid.check_spinc(h)?;
    let p = grid.p();
    let gens: Vec<GridGenerator> = grid
        .generators()
        .into_iter()
        .filter(|g| spinc_of(g, p) == h)
        .collect();
    let idx: BTreeMap<GridGenerator, usize> =
        gens.iter().enumerate().map(|(i, g)| (*g, i)).collect();
    let arrows: Vec<(usize, usize, u32, u32, u32)> = grid
        .closed_form(true)
        .into_iter()
        .filter(|a| idx.contains_key(&a.from))
        .map(|a| (idx[&a.from], idx[&a.to], a.o0, a.o1, a.x))
        .collect();
    let n = gens.len();
    let mut adj = vec![Vec::new(); n];
    for &(f, t, o0, o1, x) in &arrows {
        let da = (o0 + o1) as i64 - x as i64;
        let dm = 2 * (o0 + o1) as i64 - 1;
        adj[f].push((t, da, dm));
        adj[t].push((f, -da, -dm));
    }
    let mut a = vec![None; n];
    let mut m = vec![0i64; n];
    a[0] = Some(0);
    let mut queue = VecDeque::from([0]);
    while let Some(v) = queue.pop_front() {
        let av = a[v].expect("visited");
        for &(u, da, dm) in &adj[v] {
            match a[u] {
                None => {
                    a[u] = Some(av + da);
                    m[u] = m[v] + dm;
                    queue.push_back(u);
                }
                Some(au) if au != av + da || m[u] != m[v] + dm => {
                    return Err(GridError::InconsistentGradings { h });
                }
                _ => {}
            }
        }
    }
    if a.iter().any(|x| x.is_none()) {
        return Err(GridError::DisconnectedSlice { h });
    }
    Ok(GridSlice {
        p,
        h,
        generators: gens,
        arrows,
        alexander: a.into_iter().map(|x| x.expect("reached")).collect(),
        maslov: m,
    })
}

impl GridSlice {
    fn knot_generators(&self, sign: i64, da: i64) -> Vec<Generator> {
        self.generators
            .iter()
            .enumerate()
            .map(|(i, g)| Generator {
                name: g.name(),
                alexander: sign * self.alexander[i] + da,
                maslov: q(sign * self.maslov[i]),
                spinc: Some(self.h),
            })
            .collect()
    }

    /// X-avoiding part with `V0 = V1 = U`, in the grid's orientation.
    pub fn associated_graded(&self) -> KnotComplex {
        let arrows = self
            .arrows
            .iter()
            .filter(|a| a.4 == 0)
            .map(|a| (a.0, a.1, a.2 + a.3));
        KnotComplex::new(self.knot_generators(1, 0), arrows)
            .expect("indices in range")
            .normalized()
    }

    /// X-avoiding part keeping `V0` and `V1` apart; edge labels are
    /// `o0 * 256 + o1`.
    pub fn bivariate_graph(&self) -> LabeledGraph {
        let mut count: BTreeMap<(usize, usize, u64), u32> = BTreeMap::new();
        for a in self.arrows.iter().filter(|a| a.4 == 0) {
            *count
                .entry((a.0, a.1, (a.2 * 256 + a.3) as u64))
                .or_default() += 1;
        }
        LabeledGraph {
            grades: (0..self.generators.len())
                .map(|i| (q(self.alexander[i]), q(self.maslov[i])))
                .collect(),
            edges: count
                .into_iter()
                .filter(|(_, c)| c % 2 == 1)
                .map(|(e, _)| e)
                .collect(),
        }
    }

    /// Full complex with `V0 = V1 = U`, dualized to the knot's orientation,
    /// Alexander gradings centred on `1/2` and Maslov gradings fixed by the
    /// lens space `d`-invariant on the selected tower.
    pub fn knot_complex(&self) -> Result<KnotComplex, GridError> {
        let h = self.h;
        let n = self.generators.len() as i64;
        let sum: i64 = self.alexander.iter().sum();
        // dual has A -> -A, so the mean becomes -sum/n; move it to 1/2
        let shift = Q::new(1, 2) + Q::new(sum, n);
        if !shift.is_integer() {
            return Err(GridError::InconsistentGradings { h });
        }
        let arrows = self.arrows.iter().map(|a| (a.1, a.0, a.2 + a.3));
        let k =
            KnotComplex::new(self.knot_generators(-1, shift.to_integer()), arrows)?.normalized();
        let mut pick = None;
        for par in [0, 1] {
            let s = GradingSlice::new(&k, q(par));
            if s.homology_rank() != 1 {
                continue;
            }
            let dj = q(par) - q(2) * s.minmax_by(|_, j| q(j))?;
            let da = q(par) - q(2) * s.minmax_by(|a, _| q(a))?;
            if dj == da {
                if pick.is_some() {
                    return Err(GridError::NoTower { h });
                }
                pick = Some(dj);
            }
        }
        let d = pick.ok_or(GridError::NoTower { h })?;
        let target = lens_d(self.p, h);
        Ok(k.shifted(0, target - d).with_tower(Some(target)))
    }
}

/// The class-`h` knot complex of the lifted knot.
pub fn spinc_slice(grid: &TwistedGrid, h: i64) -> Result<KnotComplex, GridError> {
    assign_gradings(grid, h)?.knot_complex()
}

/// Every class `-n..=n`, in order.
pub fn all_slices(grid: &TwistedGrid, exec: Exec) -> Result<Vec<KnotComplex>, GridError> {
    let n = (grid.p() - 1) / 2;
    let hs: Vec<i64> = (-n..=n).collect();
    exec.map(&hs, |&h| spinc_slice(grid, h))
        .into_iter()
        .collect()
}

/// `d(L(p, q), i)` by the reciprocity recursion.
pub fn lens_d_general(p: i64, qq: i64, i: i64) -> Q {
    fn neg(p: i64, qq: i64, i: i64) -> Q {
        if p == 1 {
            return Q::default();
        }
        let t = 2 * i + 1 - p - qq;
        Q::new(p * qq - t * t, 4 * p * qq) - neg(qq, p.rem_euclid(qq), i.rem_euclid(qq))
    }
    -neg(p, qq, i)
}

/// `d(L(p, 1), h)` with `h = 0` the spin structure.
pub fn lens_d(p: i64, h: i64) -> Q {
    lens_d_general(p, 1, h.rem_euclid(p))
}
