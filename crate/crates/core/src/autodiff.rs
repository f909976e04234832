//! Automatic differentiation engine for the PDE-residual losses.
//!
//! The engine evaluates a scalar network V over a fixed computation tape. Two
//! scalar types drive the same tape:
//!
//! * [`Jet`] — a second-order Taylor object carrying the value, the four
//!   first-order partials with respect to (s, t, x1, x2) and the six
//!   second-order partials among (s, x1, x2). One jet forward pass yields
//!   every derivative the pricing PDE needs, exactly.
//! * `f64` — plain values for boundary-condition evaluations.
//!
//! Weight gradients come from a reverse sweep over the tape. Running the
//! reverse sweep in jet arithmetic (forward-over-reverse) produces, for every
//! weight, the jet of dV/dw; contracting that jet with a coefficient vector
//! gives the weight gradient of any linear functional of the derivative
//! bundle — in particular of the PDE residual itself.

use crate::error::{Error, Result};

/// First-order slots tracked by a jet, in order: s, t, x1, x2.
pub const N_FIRST: usize = 4;
/// Second-order slots: ss, s·x1, s·x2, x1·x1, x1·x2, x2·x2. Time enters the
/// PDE only through its first derivative, so no t rows are carried.
pub const N_SECOND: usize = 6;
/// Index pairs (into the first-order slots) of the second-order entries.
pub const SECOND_PAIRS: [(usize, usize); N_SECOND] =
    [(0, 0), (0, 2), (0, 3), (2, 2), (2, 3), (3, 3)];

/// Truncated second-order Taylor value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d: [f64; N_FIRST],
    pub h: [f64; N_SECOND],
}

impl Jet {
    pub const ZERO: Jet = Jet {
        v: 0.0,
        d: [0.0; N_FIRST],
        h: [0.0; N_SECOND],
    };

    pub fn constant(v: f64) -> Jet {
        Jet { v, ..Jet::ZERO }
    }

    /// Seed for one of the four differentiated variables.
    pub fn variable(v: f64, slot: usize) -> Jet {
        let mut j = Jet::constant(v);
        j.d[slot] = 1.0;
        j
    }

    fn unary(self, f: f64, f1: f64, f2: f64) -> Jet {
        let mut out = Jet::constant(f);
        for i in 0..N_FIRST {
            out.d[i] = f1 * self.d[i];
        }
        for (k, &(i, j)) in SECOND_PAIRS.iter().enumerate() {
            out.h[k] = f1 * self.h[k] + f2 * self.d[i] * self.d[j];
        }
        out
    }
}

/// Full contraction of two jets viewed as 11-vectors.
#[inline]
pub fn jet_dot(a: &Jet, b: &Jet) -> f64 {
    let mut acc = a.v * b.v;
    for i in 0..N_FIRST {
        acc += a.d[i] * b.d[i];
    }
    for k in 0..N_SECOND {
        acc += a.h[k] * b.h[k];
    }
    acc
}

/// Adjoint of the jet product: returns `c` with `jet_dot(c, b) ==
/// jet_dot(lambda, a.mul(b))` for every `b`. This turns per-weight adjoint
/// jets into gradients of a residual functional without materializing the
/// product jet for each weight.
#[inline]
pub fn jet_lt_mul(lambda: &Jet, a: &Jet) -> Jet {
    let mut c = Jet::constant(jet_dot(lambda, a));
    for i in 0..N_FIRST {
        c.d[i] = lambda.d[i] * a.v;
    }
    for (k, &(i, j)) in SECOND_PAIRS.iter().enumerate() {
        c.d[i] += lambda.h[k] * a.d[j];
        c.d[j] += lambda.h[k] * a.d[i];
        c.h[k] = lambda.h[k] * a.v;
    }
    c
}

/// Scalar type a tape can be evaluated over.
pub trait Real: Copy + std::fmt::Debug {
    fn constant(c: f64) -> Self;
    fn value(self) -> f64;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn div(self, o: Self) -> Self;
    fn neg(self) -> Self;
    /// Multiplication by a plain constant.
    fn scale(self, c: f64) -> Self;
    fn exp(self) -> Self;
    fn sqrt(self) -> Self;
    fn recip(self) -> Self;
    fn sigmoid(self) -> Self;
    fn softplus(self) -> Self;
    fn is_finite(self) -> bool;
}

#[inline]
fn sigmoid_f(z: f64) -> f64 {
    crate::analytic::sigmoid(z)
}

/// Overflow-safe softplus: ln(1 + e^z) = max(z, 0) + ln(1 + e^{-|z|}).
#[inline]
fn softplus_f(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

impl Real for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn value(self) -> f64 {
        self
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn div(self, o: Self) -> Self {
        self / o
    }
    fn neg(self) -> Self {
        -self
    }
    fn scale(self, c: f64) -> Self {
        self * c
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn sigmoid(self) -> Self {
        sigmoid_f(self)
    }
    fn softplus(self) -> Self {
        softplus_f(self)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Real for Jet {
    fn constant(c: f64) -> Self {
        Jet::constant(c)
    }
    fn value(self) -> f64 {
        self.v
    }
    #[inline]
    fn add(self, o: Self) -> Self {
        let mut out = self;
        out.v += o.v;
        for i in 0..N_FIRST {
            out.d[i] += o.d[i];
        }
        for k in 0..N_SECOND {
            out.h[k] += o.h[k];
        }
        out
    }
    #[inline]
    fn sub(self, o: Self) -> Self {
        let mut out = self;
        out.v -= o.v;
        for i in 0..N_FIRST {
            out.d[i] -= o.d[i];
        }
        for k in 0..N_SECOND {
            out.h[k] -= o.h[k];
        }
        out
    }
    #[inline]
    fn mul(self, o: Self) -> Self {
        let mut out = Jet::constant(self.v * o.v);
        for i in 0..N_FIRST {
            out.d[i] = self.d[i] * o.v + self.v * o.d[i];
        }
        for (k, &(i, j)) in SECOND_PAIRS.iter().enumerate() {
            out.h[k] =
                self.h[k] * o.v + self.v * o.h[k] + self.d[i] * o.d[j] + self.d[j] * o.d[i];
        }
        out
    }
    #[inline]
    fn div(self, o: Self) -> Self {
        self.mul(o.recip())
    }
    #[inline]
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
    #[inline]
    fn scale(self, c: f64) -> Self {
        let mut out = self;
        out.v *= c;
        for i in 0..N_FIRST {
            out.d[i] *= c;
        }
        for k in 0..N_SECOND {
            out.h[k] *= c;
        }
        out
    }
    #[inline]
    fn exp(self) -> Self {
        let f = self.v.exp();
        self.unary(f, f, f)
    }
    #[inline]
    fn sqrt(self) -> Self {
        let f = self.v.sqrt();
        let f1 = 0.5 / f;
        self.unary(f, f1, -0.5 * f1 / self.v)
    }
    #[inline]
    fn recip(self) -> Self {
        let f = 1.0 / self.v;
        self.unary(f, -f * f, 2.0 * f * f * f)
    }
    #[inline]
    fn sigmoid(self) -> Self {
        let f = sigmoid_f(self.v);
        let f1 = f * (1.0 - f);
        self.unary(f, f1, f1 * (1.0 - 2.0 * f))
    }
    #[inline]
    fn softplus(self) -> Self {
        let s = sigmoid_f(self.v);
        self.unary(softplus_f(self.v), s, s * (1.0 - s))
    }
    fn is_finite(self) -> bool {
        self.v.is_finite()
            && self.d.iter().all(|x| x.is_finite())
            && self.h.iter().all(|x| x.is_finite())
    }
}

/// Smooth activations with first and second derivatives; the same expressions
/// drive the jet propagation above.
pub fn sigmoid_d(z: f64) -> (f64, f64, f64) {
    let f = sigmoid_f(z);
    let f1 = f * (1.0 - f);
    (f, f1, f1 * (1.0 - 2.0 * f))
}

pub fn silu_d(z: f64) -> (f64, f64, f64) {
    let (s, s1, s2) = sigmoid_d(z);
    (z * s, s + z * s1, 2.0 * s1 + z * s2)
}

pub fn softplus_d(z: f64) -> (f64, f64, f64) {
    let (s, s1, _) = sigmoid_d(z);
    (softplus_f(z), s, s1)
}

/// One tape instruction. Operand fields hold node indices except for the
/// weight-referencing ops, which index the flat weight vector directly.
#[derive(Debug, Clone, Copy)]
pub enum Op {
    /// Read input slot `.0`.
    Input(u32),
    /// Load constant `consts[.0]`.
    Const(u32),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Neg(u32),
    Exp(u32),
    Sqrt(u32),
    Sigmoid(u32),
    Softplus(u32),
    Copy(u32),
    /// Dot product of `len` weights starting at `w` with the contiguous node
    /// range starting at `x`.
    DotW { w: u32, x: u32, len: u32 },
    /// `nodes[a] + weights[w]` (bias).
    AddW { a: u32, w: u32 },
}

/// Immutable program: an acyclic, topologically ordered node list (every
/// operand precedes its consumer by construction). Built once per
/// architecture; evaluation uses caller-owned buffers, so one tape serves any
/// number of points and threads concurrently.
#[derive(Debug, Clone)]
pub struct Tape {
    pub(crate) nodes: Vec<Op>,
    pub(crate) consts: Vec<f64>,
    pub n_slots: usize,
    pub n_weights: usize,
    pub out: u32,
}

impl Tape {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Forward pass. `seeds` holds one value per input slot; `vals` is resized
    /// to the tape length and filled with every node's value.
    pub fn forward<R: Real>(&self, seeds: &[R], weights: &[f64], vals: &mut Vec<R>) -> Result<R> {
        debug_assert_eq!(seeds.len(), self.n_slots);
        debug_assert_eq!(weights.len(), self.n_weights);
        vals.clear();
        vals.resize(self.nodes.len(), R::constant(0.0));
        let v = vals.as_mut_slice();
        for (idx, op) in self.nodes.iter().enumerate() {
            let r = match *op {
                Op::Input(slot) => seeds[slot as usize],
                Op::Const(c) => R::constant(self.consts[c as usize]),
                Op::Add(a, b) => v[a as usize].add(v[b as usize]),
                Op::Sub(a, b) => v[a as usize].sub(v[b as usize]),
                Op::Mul(a, b) => v[a as usize].mul(v[b as usize]),
                Op::Div(a, b) => v[a as usize].div(v[b as usize]),
                Op::Neg(a) => v[a as usize].neg(),
                Op::Exp(a) => v[a as usize].exp(),
                Op::Sqrt(a) => v[a as usize].sqrt(),
                Op::Sigmoid(a) => v[a as usize].sigmoid(),
                Op::Softplus(a) => v[a as usize].softplus(),
                Op::Copy(a) => v[a as usize],
                Op::DotW { w, x, len } => {
                    let mut acc = R::constant(0.0);
                    let (w, x, len) = (w as usize, x as usize, len as usize);
                    for i in 0..len {
                        acc = acc.add(v[x + i].scale(weights[w + i]));
                    }
                    acc
                }
                Op::AddW { a, w } => v[a as usize].add(R::constant(weights[w as usize])),
            };
            v[idx] = r;
        }
        let out = v[self.out as usize];
        if !out.is_finite() {
            let bad = v
                .iter()
                .position(|x| !x.is_finite())
                .unwrap_or(self.out as usize);
            return Err(Error::numeric(format!(
                "non-finite value during forward pass at node {bad} ({:?})",
                self.nodes[bad]
            )));
        }
        Ok(out)
    }

    /// Reverse sweep over a plain-value forward pass: accumulates
    /// `grad_scale * dV/dw` into `grad`.
    pub fn reverse_scalar(
        &self,
        vals: &[f64],
        weights: &[f64],
        grad_scale: f64,
        adj: &mut Vec<f64>,
        grad: &mut [f64],
    ) {
        adj.clear();
        adj.resize(self.nodes.len(), 0.0);
        adj[self.out as usize] = 1.0;
        for idx in (0..self.nodes.len()).rev() {
            let a_z = adj[idx];
            if a_z == 0.0 {
                continue;
            }
            match self.nodes[idx] {
                Op::Input(_) | Op::Const(_) => {}
                Op::Add(a, b) => {
                    adj[a as usize] += a_z;
                    adj[b as usize] += a_z;
                }
                Op::Sub(a, b) => {
                    adj[a as usize] += a_z;
                    adj[b as usize] -= a_z;
                }
                Op::Mul(a, b) => {
                    adj[a as usize] += a_z * vals[b as usize];
                    adj[b as usize] += a_z * vals[a as usize];
                }
                Op::Div(a, b) => {
                    let rb = 1.0 / vals[b as usize];
                    adj[a as usize] += a_z * rb;
                    adj[b as usize] -= a_z * vals[idx] * rb;
                }
                Op::Neg(a) => adj[a as usize] -= a_z,
                Op::Exp(a) => adj[a as usize] += a_z * vals[idx],
                Op::Sqrt(a) => adj[a as usize] += a_z * 0.5 / vals[idx],
                Op::Sigmoid(a) => {
                    let f = vals[idx];
                    adj[a as usize] += a_z * f * (1.0 - f);
                }
                Op::Softplus(a) => adj[a as usize] += a_z * sigmoid_f(vals[a as usize]),
                Op::Copy(a) => adj[a as usize] += a_z,
                Op::DotW { w, x, len } => {
                    let (w, x, len) = (w as usize, x as usize, len as usize);
                    for i in 0..len {
                        adj[x + i] += a_z * weights[w + i];
                        grad[w + i] += grad_scale * a_z * vals[x + i];
                    }
                }
                Op::AddW { a, w } => {
                    adj[a as usize] += a_z;
                    grad[w as usize] += grad_scale * a_z;
                }
            }
        }
    }

    /// Reverse sweep in jet arithmetic. The adjoint of each weight is the jet
    /// of dV/dw; its contraction with `lambda` (times `grad_scale`) is
    /// accumulated into `grad`. With `lambda` the value selector this is the
    /// plain weight gradient; with the PDE coefficient vector it is the weight
    /// gradient of the residual.
    pub fn reverse_jet(
        &self,
        vals: &[Jet],
        weights: &[f64],
        lambda: &Jet,
        grad_scale: f64,
        adj: &mut Vec<Jet>,
        grad: &mut [f64],
    ) {
        adj.clear();
        adj.resize(self.nodes.len(), Jet::ZERO);
        adj[self.out as usize] = Jet::constant(1.0);
        for idx in (0..self.nodes.len()).rev() {
            let a_z = adj[idx];
            match self.nodes[idx] {
                Op::Input(_) | Op::Const(_) => {}
                Op::Add(a, b) => {
                    adj[a as usize] = adj[a as usize].add(a_z);
                    adj[b as usize] = adj[b as usize].add(a_z);
                }
                Op::Sub(a, b) => {
                    adj[a as usize] = adj[a as usize].add(a_z);
                    adj[b as usize] = adj[b as usize].sub(a_z);
                }
                Op::Mul(a, b) => {
                    adj[a as usize] = adj[a as usize].add(a_z.mul(vals[b as usize]));
                    adj[b as usize] = adj[b as usize].add(a_z.mul(vals[a as usize]));
                }
                Op::Div(a, b) => {
                    let rb = vals[b as usize].recip();
                    adj[a as usize] = adj[a as usize].add(a_z.mul(rb));
                    adj[b as usize] = adj[b as usize].sub(a_z.mul(vals[idx]).mul(rb));
                }
                Op::Neg(a) => adj[a as usize] = adj[a as usize].sub(a_z),
                Op::Exp(a) => adj[a as usize] = adj[a as usize].add(a_z.mul(vals[idx])),
                Op::Sqrt(a) => {
                    adj[a as usize] = adj[a as usize].add(a_z.mul(vals[idx].recip()).scale(0.5));
                }
                Op::Sigmoid(a) => {
                    let f = vals[idx];
                    let d = f.mul(Jet::constant(1.0).sub(f));
                    adj[a as usize] = adj[a as usize].add(a_z.mul(d));
                }
                Op::Softplus(a) => {
                    let d = vals[a as usize].sigmoid();
                    adj[a as usize] = adj[a as usize].add(a_z.mul(d));
                }
                Op::Copy(a) => adj[a as usize] = adj[a as usize].add(a_z),
                Op::DotW { w, x, len } => {
                    let (w, x, len) = (w as usize, x as usize, len as usize);
                    // One transposed contraction per node, then a cheap
                    // 11-component dot per weight.
                    let c = jet_lt_mul(lambda, &a_z);
                    for i in 0..len {
                        adj[x + i] = adj[x + i].add(a_z.scale(weights[w + i]));
                        grad[w + i] += grad_scale * jet_dot(&c, &vals[x + i]);
                    }
                }
                Op::AddW { a, w } => {
                    adj[a as usize] = adj[a as usize].add(a_z);
                    grad[w as usize] += grad_scale * jet_dot(lambda, &a_z);
                }
            }
        }
    }
}

/// Incremental tape construction. Node handles are plain indices; dot-product
/// inputs must be contiguous, which the network builders arrange by emitting
/// layer outputs in dedicated loops.
pub struct TapeBuilder {
    nodes: Vec<Op>,
    consts: Vec<f64>,
    n_slots: usize,
    n_weights: usize,
}

/// Handle to a tape node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Node(pub u32);

impl Default for TapeBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl TapeBuilder {
    pub fn new() -> Self {
        TapeBuilder {
            nodes: Vec::new(),
            consts: Vec::new(),
            n_slots: 0,
            n_weights: 0,
        }
    }

    fn push(&mut self, op: Op) -> Node {
        self.nodes.push(op);
        Node(self.nodes.len() as u32 - 1)
    }

    /// Declares the next input slot and returns its node.
    pub fn slot(&mut self) -> Node {
        let s = self.n_slots as u32;
        self.n_slots += 1;
        self.push(Op::Input(s))
    }

    /// Reserves `len` consecutive entries of the weight vector.
    pub fn weights(&mut self, len: usize) -> u32 {
        let w = self.n_weights as u32;
        self.n_weights += len;
        w
    }

    pub fn constant(&mut self, c: f64) -> Node {
        let idx = self.consts.len() as u32;
        self.consts.push(c);
        self.push(Op::Const(idx))
    }

    pub fn add(&mut self, a: Node, b: Node) -> Node {
        self.push(Op::Add(a.0, b.0))
    }
    pub fn sub(&mut self, a: Node, b: Node) -> Node {
        self.push(Op::Sub(a.0, b.0))
    }
    pub fn mul(&mut self, a: Node, b: Node) -> Node {
        self.push(Op::Mul(a.0, b.0))
    }
    pub fn div(&mut self, a: Node, b: Node) -> Node {
        self.push(Op::Div(a.0, b.0))
    }
    pub fn neg(&mut self, a: Node) -> Node {
        self.push(Op::Neg(a.0))
    }
    pub fn exp(&mut self, a: Node) -> Node {
        self.push(Op::Exp(a.0))
    }
    pub fn sqrt(&mut self, a: Node) -> Node {
        self.push(Op::Sqrt(a.0))
    }
    pub fn sigmoid(&mut self, a: Node) -> Node {
        self.push(Op::Sigmoid(a.0))
    }
    pub fn softplus(&mut self, a: Node) -> Node {
        self.push(Op::Softplus(a.0))
    }
    pub fn copy(&mut self, a: Node) -> Node {
        self.push(Op::Copy(a.0))
    }

    /// `z * sigmoid(z)`.
    pub fn silu(&mut self, a: Node) -> Node {
        let s = self.sigmoid(a);
        self.mul(a, s)
    }

    /// Dot product of a weight block with `len` nodes starting at `x_start`.
    pub fn dot_w(&mut self, w: u32, x_start: Node, len: usize) -> Node {
        debug_assert!((x_start.0 as usize) + len <= self.nodes.len());
        self.push(Op::DotW {
            w,
            x: x_start.0,
            len: len as u32,
        })
    }

    pub fn add_w(&mut self, a: Node, w: u32) -> Node {
        self.push(Op::AddW { a: a.0, w })
    }

    pub fn finish(self, out: Node) -> Tape {
        Tape {
            nodes: self.nodes,
            consts: self.consts,
            n_slots: self.n_slots,
            n_weights: self.n_weights,
            out: out.0,
        }
    }
}

/// Value and every PDE-relevant derivative of a network at one point, plus
/// the gradient of the value with respect to all trainable weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivBundle {
    pub value: f64,
    pub ds: f64,
    pub dt: f64,
    pub dx1: f64,
    pub dx2: f64,
    pub dss: f64,
    pub dsx1: f64,
    pub dsx2: f64,
    pub dx1x1: f64,
    pub dx1x2: f64,
    pub dx2x2: f64,
    pub weight_grad: Vec<f64>,
}

impl DerivBundle {
    pub fn from_jet(out: &Jet, weight_grad: Vec<f64>) -> DerivBundle {
        DerivBundle {
            value: out.v,
            ds: out.d[0],
            dt: out.d[1],
            dx1: out.d[2],
            dx2: out.d[3],
            dss: out.h[0],
            dsx1: out.h[1],
            dsx2: out.h[2],
            dx1x1: out.h[3],
            dx1x2: out.h[4],
            dx2x2: out.h[5],
            weight_grad,
        }
    }
}

/// Jet forward + jet reverse with the value-selector functional: the full
/// derivative bundle of the tape output.
pub fn eval_with_derivs(tape: &Tape, seeds: &[Jet], weights: &[f64]) -> Result<DerivBundle> {
    let mut vals = Vec::new();
    let mut adj = Vec::new();
    let out = tape.forward(seeds, weights, &mut vals)?;
    let mut grad = vec![0.0; tape.n_weights];
    tape.reverse_jet(&vals, weights, &Jet::constant(1.0), 1.0, &mut adj, &mut grad);
    Ok(DerivBundle::from_jet(&out, grad))
}
