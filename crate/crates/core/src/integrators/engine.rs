//! Generic partitioned MGARK step.
//!
//! Momentum stages `P_i = p0 - H sum_j c_ij V^{tier j}_q(Q_j)` use the tilde
//! half, coordinate stages `Q_i = q0 + H sum_j c_ij T^{tier j}_p(P_j)` use
//! the bar half. Stages are evaluated group by group in dependency order;
//! each coupled group is one Newton system.
//!
//! [`PmgarkStepper`] reads the coefficients from the blocks and carries the
//! contribution of completed micro-steps as running prefix sums, so its
//! cost is linear in `M`. [`OracleStepper`] uses the dense monolithic
//! matrices and exists to cross-check it.

use std::collections::HashMap;

use super::newton::{newton_solve, NewtonProblem};
use super::{gradient, hessian, SolverConfig, StepStats, Stepper};
use crate::conditions::dependency_groups;
use crate::systems::{Part, PhaseState, SeparableSystem};
use crate::tableau::{Flattened, Matrix, MgarkTableau, PartitionedMgarkTableau, RkTableau, StageLayout, Tier, Vector};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Side {
    /// Momentum stages, driven by potential forces.
    P,
    /// Coordinate stages, driven by kinetic gradients.
    Q,
}

impl Side {
    fn ix(self) -> usize {
        self as usize
    }

    fn other(self) -> Side {
        match self {
            Side::P => Side::Q,
            Side::Q => Side::P,
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Term {
    Stage(usize, f64),
    Prefix(usize, f64),
}

/// `prefix[k] = prefix[k - 1] + sum c F(stage)`.
#[derive(Clone, Debug)]
struct PrefixDef {
    prev: Option<usize>,
    terms: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, Default)]
struct SidePlan {
    rows: Vec<Vec<Term>>,
    prefixes: Vec<PrefixDef>,
    update: Vec<Term>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Node {
    Stage(Side, usize),
    Prefix(Side, usize),
}

#[derive(Clone, Debug)]
struct Plan {
    tiers: Vec<Tier>,
    p: SidePlan,
    q: SidePlan,
    groups: Vec<Vec<Node>>,
}

fn push_nonzero(terms: &mut Vec<Term>, t: Term) {
    match t {
        Term::Stage(_, c) | Term::Prefix(_, c) if c == 0.0 => {}
        _ => terms.push(t),
    }
}

fn block_side(x: &MgarkTableau, layout: &StageLayout) -> SidePlan {
    let m = x.m();
    let inv = 1.0 / m as f64;
    let slow = layout.slow.start;
    let prefixes = (0..m)
        .map(|l| PrefixDef {
            prev: l.checked_sub(1),
            terms: x.fast[l]
                .b
                .iter()
                .enumerate()
                .filter(|(_, &b)| b != 0.0)
                .map(|(c, &b)| (layout.fast[l].start + c, b))
                .collect(),
        })
        .collect();
    let mut rows = vec![Vec::new(); layout.len()];
    for l in 0..m {
        let f = &x.fast[l];
        for r in 0..f.stages() {
            let row = &mut rows[layout.fast[l].start + r];
            if l > 0 {
                push_nonzero(row, Term::Prefix(l - 1, inv));
            }
            for c in 0..f.stages() {
                push_nonzero(row, Term::Stage(layout.fast[l].start + c, f.a[(r, c)] * inv));
            }
            for c in 0..x.slow.stages() {
                push_nonzero(row, Term::Stage(slow + c, x.fs[l][(r, c)]));
            }
        }
    }
    for r in 0..x.slow.stages() {
        let row = &mut rows[slow + r];
        for c in 0..x.slow.stages() {
            push_nonzero(row, Term::Stage(slow + c, x.slow.a[(r, c)]));
        }
        for l in 0..m {
            for c in 0..x.fast[l].stages() {
                push_nonzero(row, Term::Stage(layout.fast[l].start + c, x.sf[l][(r, c)] * inv));
            }
        }
    }
    let mut update = Vec::new();
    push_nonzero(&mut update, Term::Prefix(m - 1, inv));
    for (c, &b) in x.slow.b.iter().enumerate() {
        push_nonzero(&mut update, Term::Stage(slow + c, b));
    }
    SidePlan { rows, prefixes, update }
}

fn dense_side(t: &RkTableau) -> SidePlan {
    let n = t.stages();
    let mut rows = vec![Vec::new(); n];
    for (r, row) in rows.iter_mut().enumerate() {
        for c in 0..n {
            push_nonzero(row, Term::Stage(c, t.a[(r, c)]));
        }
    }
    let mut update = Vec::new();
    for (c, &b) in t.b.iter().enumerate() {
        push_nonzero(&mut update, Term::Stage(c, b));
    }
    SidePlan {
        rows,
        prefixes: Vec::new(),
        update,
    }
}

impl Plan {
    fn new(layout: &StageLayout, p: SidePlan, q: SidePlan) -> Plan {
        let n = layout.len();
        let tiers = (0..n).map(|i| layout.tier_of(i)).collect();
        let (np, nq) = (p.prefixes.len(), q.prefixes.len());
        let nodes: Vec<Node> = (0..n)
            .map(|i| Node::Stage(Side::P, i))
            .chain((0..n).map(|i| Node::Stage(Side::Q, i)))
            .chain((0..np).map(|k| Node::Prefix(Side::P, k)))
            .chain((0..nq).map(|k| Node::Prefix(Side::Q, k)))
            .collect();
        let id = |node: Node| match node {
            Node::Stage(Side::P, i) => i,
            Node::Stage(Side::Q, i) => n + i,
            Node::Prefix(Side::P, k) => 2 * n + k,
            Node::Prefix(Side::Q, k) => 2 * n + np + k,
        };
        let mut edges = Vec::new();
        for (side, plan) in [(Side::P, &p), (Side::Q, &q)] {
            for (i, row) in plan.rows.iter().enumerate() {
                let from = id(Node::Stage(side, i));
                for t in row {
                    let to = match *t {
                        Term::Stage(j, _) => Node::Stage(side.other(), j),
                        Term::Prefix(k, _) => Node::Prefix(side, k),
                    };
                    edges.push((from, id(to)));
                }
            }
            for (k, def) in plan.prefixes.iter().enumerate() {
                let from = id(Node::Prefix(side, k));
                if let Some(prev) = def.prev {
                    edges.push((from, id(Node::Prefix(side, prev))));
                }
                for &(j, _) in &def.terms {
                    edges.push((from, id(Node::Stage(side.other(), j))));
                }
            }
        }
        let groups = dependency_groups(nodes.len(), edges)
            .into_iter()
            .map(|g| g.into_iter().map(|i| nodes[i]).collect())
            .collect();
        Plan { tiers, p, q, groups }
    }

    fn side(&self, s: Side) -> &SidePlan {
        match s {
            Side::P => &self.p,
            Side::Q => &self.q,
        }
    }

    fn from_blocks(t: &PartitionedMgarkTableau) -> Plan {
        let layout = t.bar.layout();
        Plan::new(&layout, block_side(&t.tilde, &layout), block_side(&t.bar, &layout))
    }

    fn from_flattened(f: &Flattened) -> Plan {
        Plan::new(&f.layout, dense_side(&f.tilde), dense_side(&f.bar))
    }
}

/// The part whose gradient a stage of `side` contributes to the other side.
fn part_of(side: Side, tier: Tier) -> Part {
    match (side, tier.is_slow()) {
        (Side::P, true) => Part::SlowKinetic,
        (Side::P, false) => Part::FastKinetic,
        (Side::Q, true) => Part::SlowPotential,
        (Side::Q, false) => Part::FastPotential,
    }
}

struct Run<'a> {
    plan: &'a Plan,
    sys: &'a dyn SeparableSystem,
    y0: &'a PhaseState,
    h: f64,
    cfg: SolverConfig,
    stats: &'a mut StepStats,
    values: [Vec<Vector>; 2],
    /// Gradient contributed by each stage, `None` for vanishing parts.
    forces: [Vec<Option<Vector>>; 2],
    prefixes: [Vec<Vector>; 2],
    /// Most recently computed stage of each side, the next Newton guess.
    last: [Vector; 2],
}

impl<'a> Run<'a> {
    fn new(
        plan: &'a Plan,
        sys: &'a dyn SeparableSystem,
        y0: &'a PhaseState,
        h: f64,
        cfg: SolverConfig,
        stats: &'a mut StepStats,
    ) -> Self {
        let n = plan.tiers.len();
        let d = y0.dim();
        let per_side = |side: Side, start: &Vector| {
            (
                vec![start.clone(); n],
                vec![None; n],
                vec![Vector::zeros(d); plan.side(side).prefixes.len()],
            )
        };
        let (vp, fp, pp) = per_side(Side::P, &y0.p);
        let (vq, fq, pq) = per_side(Side::Q, &y0.q);
        let (values, forces, prefixes) = ([vp, vq], [fp, fq], [pp, pq]);
        let last = [y0.p.clone(), y0.q.clone()];
        Run {
            plan,
            sys,
            y0,
            h,
            cfg: cfg.for_step(h),
            stats,
            values,
            forces,
            prefixes,
            last,
        }
    }

    fn start(&self, side: Side) -> &Vector {
        match side {
            Side::P => &self.y0.p,
            Side::Q => &self.y0.q,
        }
    }

    /// `p0 - H sum` for momenta, `q0 + H sum` for coordinates.
    fn combine(&self, side: Side, terms: &[Term]) -> Vector {
        let src = side.other();
        let mut acc = Vector::zeros(self.y0.dim());
        for t in terms {
            match *t {
                Term::Stage(j, c) => {
                    if let Some(f) = &self.forces[src.ix()][j] {
                        acc.axpy(c, f, 1.0);
                    }
                }
                Term::Prefix(k, c) => acc.axpy(c, &self.prefixes[side.ix()][k], 1.0),
            }
        }
        let sign = if side == Side::P { -self.h } else { self.h };
        self.start(side) + acc * sign
    }

    fn set_stage(&mut self, side: Side, i: usize, v: Vector) {
        let part = part_of(side, self.plan.tiers[i]);
        let f = gradient(self.sys, part, &v, self.stats);
        self.forces[side.ix()][i] = f;
        self.last[side.ix()] = v.clone();
        self.values[side.ix()][i] = v;
    }

    fn eval_prefix(&mut self, side: Side, k: usize) {
        let def = &self.plan.side(side).prefixes[k];
        let src = side.other();
        let mut acc = match def.prev {
            Some(p) => self.prefixes[side.ix()][p].clone(),
            None => Vector::zeros(self.y0.dim()),
        };
        for &(j, c) in &def.terms {
            if let Some(f) = &self.forces[src.ix()][j] {
                acc.axpy(c, f, 1.0);
            }
        }
        self.prefixes[side.ix()][k] = acc;
    }

    fn solve_group(&mut self, group: &[Node]) -> Result<()> {
        if let [node] = group {
            match *node {
                Node::Stage(side, i) => {
                    let v = self.combine(side, &self.plan.side(side).rows[i]);
                    self.set_stage(side, i, v);
                }
                Node::Prefix(side, k) => self.eval_prefix(side, k),
            }
            return Ok(());
        }
        let unknowns: Vec<(Side, usize)> = group
            .iter()
            .filter_map(|n| match *n {
                Node::Stage(s, i) => Some((s, i)),
                Node::Prefix(..) => None,
            })
            .collect();
        let mut prefixes: Vec<(Side, usize)> = group
            .iter()
            .filter_map(|n| match *n {
                Node::Prefix(s, k) => Some((s, k)),
                Node::Stage(..) => None,
            })
            .collect();
        prefixes.sort_by_key(|&(s, k)| (s == Side::Q, k));
        let guess = {
            let parts: Vec<&Vector> = unknowns.iter().map(|(s, _)| &self.last[s.ix()]).collect();
            stack(&parts)
        };
        let cfg = self.cfg;
        let mut problem = GroupProblem {
            run: self,
            unknowns,
            prefixes,
            evaluated: None,
        };
        let (z, iters) = newton_solve(&mut problem, guess, &cfg)?;
        problem.load(&z);
        problem.run.stats.newton_iters += iters;
        Ok(())
    }

    fn finish(mut self) -> Result<PhaseState> {
        for g in &self.plan.groups {
            self.solve_group(g)?;
        }
        let p = self.combine(Side::P, &self.plan.p.update);
        let q = self.combine(Side::Q, &self.plan.q.update);
        self.stats.base_steps += 1;
        Ok(PhaseState::new(p, q))
    }
}

fn stack(parts: &[&Vector]) -> Vector {
    let n: usize = parts.iter().map(|v| v.len()).sum();
    Vector::from_iterator(n, parts.iter().flat_map(|v| v.iter().copied()))
}

struct GroupProblem<'r, 'a> {
    run: &'r mut Run<'a>,
    unknowns: Vec<(Side, usize)>,
    prefixes: Vec<(Side, usize)>,
    evaluated: Option<Vector>,
}

impl GroupProblem<'_, '_> {
    fn load(&mut self, z: &Vector) {
        if self.evaluated.as_ref() == Some(z) {
            return;
        }
        let d = self.run.y0.dim();
        for (k, &(side, i)) in self.unknowns.iter().enumerate() {
            self.run.set_stage(side, i, z.rows(k * d, d).into_owned());
        }
        for &(side, k) in &self.prefixes {
            self.run.eval_prefix(side, k);
        }
        self.evaluated = Some(z.clone());
    }

    fn position(&self, side: Side, i: usize) -> Option<usize> {
        self.unknowns.iter().position(|&u| u == (side, i))
    }

    /// Coefficients with which the unknown stages enter `terms`, with
    /// prefix sums inside the group expanded.
    fn expand(&self, side: Side, terms: &[Term], out: &mut Vec<(usize, f64)>) {
        let src = side.other();
        for t in terms {
            match *t {
                Term::Stage(j, c) => {
                    if let Some(u) = self.position(src, j) {
                        out.push((u, c));
                    }
                }
                Term::Prefix(k, c) => {
                    if !self.prefixes.contains(&(side, k)) {
                        continue;
                    }
                    let mut k = Some(k);
                    while let Some(kk) = k.filter(|kk| self.prefixes.contains(&(side, *kk))) {
                        let def = &self.run.plan.side(side).prefixes[kk];
                        for &(j, b) in &def.terms {
                            if let Some(u) = self.position(src, j) {
                                out.push((u, c * b));
                            }
                        }
                        k = def.prev;
                    }
                }
            }
        }
    }
}

impl NewtonProblem for GroupProblem<'_, '_> {
    fn residual(&mut self, z: &Vector) -> Vector {
        self.load(z);
        let d = self.run.y0.dim();
        let mut r = z.clone();
        for (k, &(side, i)) in self.unknowns.iter().enumerate() {
            let rhs = self.run.combine(side, &self.run.plan.side(side).rows[i]);
            let mut rows = r.rows_mut(k * d, d);
            rows -= rhs;
        }
        r
    }

    fn jacobian(&mut self, z: &Vector) -> Option<Matrix> {
        self.load(z);
        let d = self.run.y0.dim();
        let n = self.unknowns.len();
        let mut hess: HashMap<usize, Matrix> = HashMap::new();
        let mut j = Matrix::identity(n * d, n * d);
        let mut coeffs = Vec::new();
        for (row, &(side, i)) in self.unknowns.iter().enumerate() {
            coeffs.clear();
            self.expand(side, &self.run.plan.side(side).rows[i], &mut coeffs);
            // dR/dz = -d(rhs)/dz; rhs carries -H for momenta and +H for coordinates
            let sign = if side == Side::P { self.run.h } else { -self.run.h };
            for &(col, c) in &coeffs {
                let h = hess.entry(col).or_insert_with(|| {
                    let (s, jj) = self.unknowns[col];
                    let part = part_of(s, self.run.plan.tiers[jj]);
                    hessian(self.run.sys, part, &self.run.values[s.ix()][jj], &self.run.cfg)
                });
                let mut block = j.view_mut((row * d, col * d), (d, d));
                block += &*h * (sign * c);
            }
        }
        Some(j)
    }
}

pub(crate) fn check_dims(sys: &dyn SeparableSystem, y: &PhaseState) -> Result<()> {
    if y.p.len() != sys.dim() || y.q.len() != sys.dim() {
        return Err(Error::Dimension(format!(
            "state has {} momenta and {} coordinates, system has dimension {}",
            y.p.len(),
            y.q.len(),
            sys.dim()
        )));
    }
    Ok(())
}

pub(crate) use check_dims as check_state;

/// Generic partitioned MGARK stepper on block coefficients.
#[derive(Clone, Debug)]
pub struct PmgarkStepper {
    pub tableau: PartitionedMgarkTableau,
    pub cfg: SolverConfig,
    name: String,
    plan: Plan,
}

impl PmgarkStepper {
    pub fn new(tableau: PartitionedMgarkTableau, cfg: SolverConfig) -> Result<Self> {
        tableau.validate()?;
        cfg.validate()?;
        let plan = Plan::from_blocks(&tableau);
        Ok(PmgarkStepper {
            name: format!("pmgark(M={})", tableau.m()),
            tableau,
            cfg,
            plan,
        })
    }

    /// Equal halves: every stage carries both momenta and coordinates.
    pub fn from_mgark(t: &MgarkTableau, cfg: SolverConfig) -> Result<Self> {
        Self::new(t.partitioned(), cfg)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Number of groups solved per step and the size of the largest one.
    pub fn group_sizes(&self) -> Vec<usize> {
        self.plan.groups.iter().map(Vec::len).collect()
    }
}

impl Stepper for PmgarkStepper {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn step(&self, sys: &dyn SeparableSystem, y: &PhaseState, h: f64, stats: &mut StepStats) -> Result<PhaseState> {
        check_dims(sys, y)?;
        Run::new(&self.plan, sys, y, h, self.cfg, stats).finish()
    }
}

/// Stepper on the dense monolithic matrices of a tableau.
#[derive(Clone, Debug)]
pub struct OracleStepper {
    pub flattened: Flattened,
    pub cfg: SolverConfig,
    plan: Plan,
}

impl OracleStepper {
    pub fn new(t: &PartitionedMgarkTableau, cfg: SolverConfig) -> Result<Self> {
        t.validate()?;
        let flattened = t.flatten();
        let plan = Plan::from_flattened(&flattened);
        Ok(OracleStepper { flattened, cfg, plan })
    }
}

impl Stepper for OracleStepper {
    fn name(&self) -> String {
        format!("oracle(M={})", self.flattened.m)
    }

    fn step(&self, sys: &dyn SeparableSystem, y: &PhaseState, h: f64, stats: &mut StepStats) -> Result<PhaseState> {
        check_dims(sys, y)?;
        Run::new(&self.plan, sys, y, h, self.cfg, stats).finish()
    }
}
