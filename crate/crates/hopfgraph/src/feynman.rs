//! Evaluation of graph sums as perturbative n-point functions, an
//! independent zero-dimensional series oracle, and the expansion of
//! connected functions as trees of one-particle-irreducible building
//! blocks.
//!
//! The oracle works in a zero-dimensional field theory: the path integral
//! is an ordinary Gaussian-moment sum, Z(g, j) is computed term by term,
//! and connected functions are source derivatives of log Z.  None of this
//! shares code with the graph generator, which is the point.

use std::collections::{BTreeMap, HashMap};

use num::bigint::BigInt;
use num::{One, Zero};

use crate::generator::Generator;
use crate::graph::{Graph, Label, Species};
use crate::model::FieldModel;
use crate::series::Series;
use crate::sum::GraphSum;
use crate::weight::{format_rat, rat, rat_int, Rat};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Feynman rules
// ---------------------------------------------------------------------------

fn vertex_profile(g: &Graph, vertex: u8, species_count: u8) -> Vec<u32> {
    let mut profile = vec![0u32; species_count as usize];
    for leg in g.legs() {
        if leg.vertex == vertex {
            profile[leg.species.0 as usize - 1] += 1;
        }
    }
    for e in g.edges() {
        if e.a == vertex {
            profile[e.species.0 as usize - 1] += 1;
        }
        if e.b == vertex {
            profile[e.species.0 as usize - 1] += 1;
        }
    }
    profile
}

/// Value of one graph under the textbook convention: each internal edge
/// contributes the propagator, each vertex its coupling, and each external
/// leg a propagator unless the model is amputated.  The graph-sum weight is
/// not included here.
pub fn evaluate_graph(g: &Graph, model: &FieldModel) -> Result<Series> {
    let mut scalar = Rat::one();
    for e in g.edges() {
        scalar *= model.propagator(e.species)?;
    }
    if !model.amputated() {
        for leg in g.legs() {
            scalar *= model.propagator(leg.species)?;
        }
    }
    let mut out = model.one_series();
    for vertex in 1..=g.vertex_count() as u8 {
        let profile = vertex_profile(g, vertex, model.species_count());
        out = out.mul(&model.coupling(&profile)?)?;
    }
    Ok(out.scale(&scalar))
}

/// Weighted sum of graph values: Σ weight × value.
pub fn evaluate_sum(s: &GraphSum, model: &FieldModel) -> Result<Series> {
    let mut acc = model.zero_series();
    for (g, w) in s.iter() {
        acc = acc.add(&evaluate_graph(g, model)?.scale(w))?;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Zero-dimensional oracle
// ---------------------------------------------------------------------------

fn rat_pow(r: &Rat, k: u32) -> Rat {
    let mut out = Rat::one();
    for _ in 0..k {
        out *= r;
    }
    out
}

fn factorial(n: u32) -> Rat {
    let mut f = BigInt::one();
    for i in 2..=n as u64 {
        f *= i;
    }
    Rat::from_integer(f)
}

/// Gaussian moment <x^d> with covariance `propagator`: (d-1)!! G^{d/2} for
/// even d, zero for odd d.
fn gaussian_moment(d: u32, propagator: &Rat) -> Rat {
    if d % 2 == 1 {
        return Rat::zero();
    }
    let mut dfac = BigInt::one();
    let mut i = d as i64 - 1;
    while i > 1 {
        dfac *= i;
        i -= 2;
    }
    Rat::from_integer(dfac) * rat_pow(propagator, d / 2)
}

/// W(g, j) = log Z for the interaction g x^k / k! with source j, as a series
/// in (g, j) truncated at the given caps.
pub fn log_z(k: u32, propagator: &Rat, g_cap: u32, j_cap: u32) -> Result<Series> {
    let vars = ["g", "j"];
    let caps = [g_cap, j_cap];
    let mut z = Series::zero(&vars, &caps);
    let k_fact = factorial(k);
    for p in 0..=g_cap {
        for q in 0..=j_cap {
            let m = gaussian_moment(k * p + q, propagator);
            if m.is_zero() {
                continue;
            }
            let c = m / (rat_pow(&k_fact, p) * factorial(p) * factorial(q));
            let mono = Series::var(&vars, &caps, 0)
                .pow(p)?
                .mul(&Series::var(&vars, &caps, 1).pow(q)?)?;
            z = z.add(&mono.scale(&c))?;
        }
    }
    z.log()
}

/// Keeps the j-independent part and reshapes to a series in g alone.
fn project_g(s: &Series, order: u32) -> Series {
    let mut out = Series::zero(&["g"], &[order]);
    let mono = Series::var(&["g"], &[order], 0);
    for (e, c) in s.terms() {
        if e[1] == 0 {
            out = out
                .add(&mono.pow(e[0]).expect("same shape").scale(c))
                .expect("same shape");
        }
    }
    out
}

/// The connected n-point function G_c^{(n)} = ∂^n_j log Z |_{j=0} of the
/// zero-dimensional model with interaction g x^k / k!, as a series in g.
pub fn zero_d_connected_oracle(
    k: u32,
    propagator: &Rat,
    n: u32,
    order: u32,
) -> Result<Series> {
    let mut w = log_z(k, propagator, order, n)?;
    for _ in 0..n {
        w = w.derivative(1);
    }
    Ok(project_g(&w.at_zero(1), order))
}

/// g^p coefficient of G_c^{(n)} from the generator pipeline for a monomial
/// degree-k model: p vertices of degree k fix the edge count through
/// k p = 2e + n, and with it the loop number.  The p = 0 sector is the bare
/// line: the propagator for n = 2, zero otherwise.
pub fn pipeline_coefficient(
    gen: &Generator,
    model: &FieldModel,
    k: u32,
    n: u32,
    p: u32,
) -> Result<Rat> {
    if p == 0 {
        return Ok(if n == 2 {
            model.propagator(Species(1))?.clone()
        } else {
            Rat::zero()
        });
    }
    let half_edges = k as i64 * p as i64 - n as i64;
    if half_edges < 0 || half_edges % 2 == 1 {
        return Ok(Rat::zero());
    }
    let e = (half_edges / 2) as u32;
    if e + 1 < p {
        return Ok(Rat::zero());
    }
    let l = e + 1 - p;
    let sum = gen.enumerate_connected(l, p, &generic_labels(n))?;
    Ok(evaluate_sum(&sum, model)?.coeff(&[p]))
}

// ---------------------------------------------------------------------------
// 1PI tables
// ---------------------------------------------------------------------------

/// One-particle-irreducible vertex functions by leg count.  The 0- and
/// 1-point entries are zero by convention; the modified table has a zero
/// 2-point entry as well (its 2-point content moves into the edge
/// propagator).
#[derive(Debug, Clone)]
pub struct OnePiTable {
    entries: BTreeMap<u32, Series>,
    modified: bool,
    zero: Series,
}

impl OnePiTable {
    pub fn new(entries: BTreeMap<u32, Series>, modified: bool) -> Result<OnePiTable> {
        let template = entries
            .values()
            .next()
            .ok_or_else(|| Error::BadOnePiTable("empty table".into()))?;
        let zero = template.scale(&Rat::zero());
        for (n, s) in &entries {
            if s.vars() != template.vars() || s.caps() != template.caps() {
                return Err(Error::SeriesMismatch);
            }
            let must_vanish = *n <= 1 || (modified && *n == 2);
            if must_vanish && !s.is_zero() {
                return Err(Error::BadOnePiTable(format!(
                    "nonzero entry for {n} legs"
                )));
            }
        }
        Ok(OnePiTable { entries, modified, zero })
    }

    pub fn modified(&self) -> bool {
        self.modified
    }

    pub fn zero_series(&self) -> &Series {
        &self.zero
    }

    /// Vertex value for a given leg count; conventionally zero entries do
    /// not need to be present, everything else does.
    pub fn value(&self, n: u32) -> Result<&Series> {
        if n <= 1 || (self.modified && n == 2) {
            return Ok(&self.zero);
        }
        self.entries
            .get(&n)
            .ok_or_else(|| Error::BadOnePiTable(format!("no entry for {n} legs")))
    }
}

// ---------------------------------------------------------------------------
// Connected functions as trees of 1PI vertices
// ---------------------------------------------------------------------------

fn generic_labels(n: u32) -> Vec<(Label, Species)> {
    (1..=n as u8).map(|k| (Label(k), Species(1))).collect()
}

/// σ^v(n): the v-vertex tree contribution to the connected n-point
/// function, built from Ω^{0,v}.  Each internal edge contributes
/// `edge_factor` (the reciprocal of the propagator joining the 1PI blocks)
/// and each vertex of degree d contributes `tau.value(d)`.
pub fn connected_from_1pi(
    gen: &Generator,
    v: u32,
    n: u32,
    tau: &OnePiTable,
    edge_factor: &Series,
) -> Result<Series> {
    let trees = gen.enumerate_connected(0, v, &generic_labels(n))?;
    let edges = edge_factor.pow(v - 1)?;
    let mut acc = tau.zero_series().clone();
    for (g, w) in trees.iter() {
        let mut val = edges.clone();
        for vertex in 1..=g.vertex_count() as u8 {
            let t = tau.value(g.degree(vertex))?;
            if t.is_zero() {
                val = tau.zero_series().clone();
                break;
            }
            val = val.mul(t)?;
        }
        acc = acc.add(&val.scale(w))?;
    }
    Ok(acc)
}

fn binomial_rat(n: u32, k: u32) -> Rat {
    let mut r = Rat::one();
    for i in 0..k {
        r = r * rat_int((n - i) as i64) / rat_int((i + 1) as i64);
    }
    r
}

/// Same value as [`connected_from_1pi`], obtained by the evaluated-level
/// recursion: split off one edge, distribute the legs over the two sides
/// binomially, and combine the sub-values.
pub fn connected_from_1pi_rec(
    v: u32,
    n: u32,
    tau: &OnePiTable,
    edge_factor: &Series,
) -> Result<Series> {
    let mut memo: HashMap<(u32, u32), Series> = HashMap::new();
    sigma_rec(v, n, tau, edge_factor, &mut memo)
}

fn sigma_rec(
    v: u32,
    n: u32,
    tau: &OnePiTable,
    edge_factor: &Series,
    memo: &mut HashMap<(u32, u32), Series>,
) -> Result<Series> {
    if let Some(hit) = memo.get(&(v, n)) {
        return Ok(hit.clone());
    }
    let out = if v == 1 {
        tau.value(n)?.clone()
    } else {
        let mut acc = tau.zero_series().clone();
        for i in 1..v {
            for s in 0..=n {
                let left = sigma_rec(i, s + 1, tau, edge_factor, memo)?;
                if left.is_zero() {
                    continue;
                }
                let right = sigma_rec(v - i, n - s + 1, tau, edge_factor, memo)?;
                if right.is_zero() {
                    continue;
                }
                let c = binomial_rat(n, s) * rat(1, 2);
                acc = acc.add(&left.mul(&right)?.mul(edge_factor)?.scale(&c))?;
            }
        }
        acc.scale(&rat(1, (v - 1) as i64))
    };
    memo.insert((v, n), out.clone());
    Ok(out)
}

/// The modified expansion: sums σ̂^v over v until no tree with every vertex
/// of valence ≥ 3 exists any more (a tree with v such vertices needs at
/// least v + 2 external legs, so this always terminates).  Returns the sum
/// and the largest v that structurally contributes.
pub fn modified_connected_sum(
    gen: &Generator,
    n: u32,
    tau_hat: &OnePiTable,
    edge_factor: &Series,
) -> Result<(Series, u32)> {
    if !tau_hat.modified() {
        return Err(Error::BadOnePiTable(
            "modified expansion needs a modified table".into(),
        ));
    }
    let mut acc = tau_hat.zero_series().clone();
    let mut max_v = 0;
    for v in 1.. {
        let trees = gen.enumerate_connected(0, v, &generic_labels(n))?;
        if !trees.iter().any(|(g, _)| g.min_valence() >= 3) {
            break;
        }
        max_v = v;
        acc = acc.add(&connected_from_1pi(gen, v, n, tau_hat, edge_factor)?)?;
    }
    Ok((acc, max_v))
}

// ---------------------------------------------------------------------------
// Legendre transform of the oracle: 1PI tables from W
// ---------------------------------------------------------------------------

/// τ and τ̂ tables for the monomial model g x^k / k!, extracted from the
/// zero-dimensional W by Legendre transform.  All series are in g alone,
/// truncated at `order`.
pub struct LegendreTables {
    pub tau: OnePiTable,
    pub tau_hat: OnePiTable,
    /// reciprocal of the bare propagator (standard edge factor)
    pub edge_factor: Series,
    /// reciprocal of the full connected 2-point function (modified edge
    /// factor)
    pub edge_factor_hat: Series,
    /// the full connected 2-point function G_c^{(2)}
    pub g_c2: Series,
}

/// Computes the effective action Γ(φ) = W(j) − jφ at φ = W'(j), expands its
/// derivatives at the stationary point φ* = W'(0), and dresses them into
/// unamputated 1PI vertex functions:
///
/// ```text
/// τ(2) = G² (Γ''(φ*) + 1/G),    τ(n ≥ 3) = Gⁿ Γ⁽ⁿ⁾(φ*)
/// τ̂(n ≥ 3) = (G_c^{(2)})ⁿ Γ⁽ⁿ⁾(φ*)
/// ```
///
/// The expansion point matters: for odd interactions the one-point function
/// is nonzero and expanding Γ at φ = 0 would not reproduce the connected
/// functions.
pub fn legendre_tables(
    k: u32,
    propagator: &Rat,
    n_max: u32,
    order: u32,
) -> Result<LegendreTables> {
    if n_max < 3 {
        return Err(Error::CapTooSmall { caps: vec![n_max], needed: 3 });
    }
    // the j variable doubles as φ after inversion; φ-degree d terms of Γ
    // feed g-orders ≥ d at the stationary point, hence the widened cap
    let j_cap = n_max + order;
    let w = log_z(k, propagator, order, j_cap)?;
    let w_j = w.derivative(1);
    let vars = ["g", "j"];
    let caps = [order, j_cap];
    let jv = Series::var(&vars, &caps, 1);
    let inv_g = rat_int(1) / propagator;

    // invert φ = W'(j) by fixed-point iteration on j = (φ - R(j)) / G,
    // where R = W' - G j collects the interaction terms
    let r = w_j.sub(&jv.scale(propagator))?;
    let mut j_star = jv.scale(&inv_g);
    let mut converged = false;
    for _ in 0..=(2 * (j_cap + order) + 4) {
        let next = jv.sub(&r.subst(1, &j_star)?)?.scale(&inv_g);
        if next == j_star {
            converged = true;
            break;
        }
        j_star = next;
    }
    if !converged {
        return Err(Error::Model("Legendre inversion did not converge".into()));
    }

    let gamma = w.subst(1, &j_star)?.sub(&j_star.mul(&jv)?)?;
    let phi_star = w_j.at_zero(1);
    if !phi_star.constant_term().is_zero() {
        return Err(Error::Model(format!(
            "stationary point has a g-independent part {}",
            format_rat(&phi_star.constant_term())
        )));
    }

    let g_c2 = zero_d_connected_oracle(k, propagator, 2, order)?;
    let mut tau = BTreeMap::new();
    let mut tau_hat = BTreeMap::new();
    let mut deriv = gamma.derivative(1).derivative(1);
    for n in 2..=n_max {
        let at_star = project_g(&deriv.subst(1, &phi_star)?, order);
        if n == 2 {
            let dressed = at_star
                .add(&Series::constant(&["g"], &[order], inv_g.clone()))?
                .scale(&rat_pow(propagator, 2));
            tau.insert(2, dressed);
        } else {
            tau.insert(n, at_star.scale(&rat_pow(propagator, n)));
            tau_hat.insert(n, at_star.mul(&g_c2.pow(n)?)?);
        }
        deriv = deriv.derivative(1);
    }
    let edge_factor = Series::constant(&["g"], &[order], inv_g);
    let edge_factor_hat = g_c2.inverse()?;
    Ok(LegendreTables {
        tau: OnePiTable::new(tau, false)?,
        tau_hat: OnePiTable::new(tau_hat, true)?,
        edge_factor,
        edge_factor_hat,
        g_c2,
    })
}
