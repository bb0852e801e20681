//! Finite measures on `M1 x E`, their pushforward along `F`, the exact
//! disintegration into conditional probabilities, and `L^p` errors.
//!
//! All sums run over atoms in ascending row-major order `(x, e)` and over
//! groups in ascending key order, so results are reproducible bit for bit.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::decoder::SetValuedDecoder;
use crate::error::{Error, Result};
use crate::metric::hausdorff_point_set;
use crate::problem::{Atom, MeasurementTable, Problem};

/// A finite, not necessarily normalized, measure on the atoms `(x_i, e_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    n_x: usize,
    n_e: usize,
    weights: Vec<f64>,
    total_mass: f64,
}

impl DiscreteMeasure {
    /// `weights` is row-major `n_x x n_e`.
    pub fn new(n_x: usize, n_e: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != n_x * n_e {
            return Err(Error::InvalidMeasure(format!(
                "expected {} weights, found {}",
                n_x * n_e,
                weights.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidMeasure(format!(
                "weight {i} must be finite and non-negative"
            )));
        }
        let total_mass: f64 = weights.iter().sum();
        if !(total_mass > 0.0 && total_mass.is_finite()) {
            return Err(Error::ZeroMass);
        }
        Ok(DiscreteMeasure {
            n_x,
            n_e,
            weights,
            total_mass,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_x = rows.len();
        let n_e = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != n_e) {
            return Err(Error::InvalidMeasure(format!(
                "row {i} has {} weights, expected {n_e}",
                rows[i].len()
            )));
        }
        DiscreteMeasure::new(n_x, n_e, rows.concat())
    }

    /// Probability measure with equal weight `1 / (n_x n_e)` on every atom.
    pub fn uniform(n_x: usize, n_e: usize) -> Result<Self> {
        let n = n_x * n_e;
        DiscreteMeasure::new(n_x, n_e, vec![1.0 / n as f64; n])
    }

    pub fn uniform_for(problem: &Problem) -> Result<Self> {
        DiscreteMeasure::uniform(problem.model_class().len(), problem.noise_class().len())
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_e(&self) -> usize {
        self.n_e
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, atom: Atom) -> f64 {
        self.weights[atom.x * self.n_e + atom.e]
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.weights.chunks(self.n_e).map(<[f64]>::to_vec).collect()
    }

    /// `c * mu`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        DiscreteMeasure::new(
            self.n_x,
            self.n_e,
            self.weights.iter().map(|w| w * factor).collect(),
        )
    }

    fn check_table(&self, table: &MeasurementTable) -> Result<()> {
        if self.n_x != table.n_x() || self.n_e != table.n_e() {
            return Err(Error::InvalidMeasure(format!(
                "measure is {}x{}, problem has {}x{} atoms",
                self.n_x,
                self.n_e,
                table.n_x(),
                table.n_e()
            )));
        }
        Ok(())
    }
}

/// `F_* mu`, one mass per group of the measurement table.
#[derive(Debug, Clone, PartialEq)]
pub struct PushforwardMeasure {
    masses: Vec<f64>,
}

impl PushforwardMeasure {
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass(&self, group: usize) -> f64 {
        self.masses[group]
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }
}

pub fn pushforward(mu: &DiscreteMeasure, table: &MeasurementTable) -> Result<PushforwardMeasure> {
    mu.check_table(table)?;
    let masses = table
        .groups()
        .iter()
        .map(|g| g.members().iter().map(|&a| mu.weight(a)).sum())
        .collect();
    Ok(PushforwardMeasure { masses })
}

/// Conditional probabilities `mu^y` on each group's members.
///
/// Groups of zero pushforward mass are `F_* mu`-null and carry no
/// conditional measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Disintegration {
    pushforward: PushforwardMeasure,
    conditionals: Vec<Option<Vec<f64>>>,
}

impl Disintegration {
    pub fn pushforward(&self) -> &PushforwardMeasure {
        &self.pushforward
    }

    /// Weights of `mu^y` aligned with the group's members, if defined.
    pub fn conditional(&self, group: usize) -> Option<&[f64]> {
        self.conditionals[group].as_deref()
    }

    pub fn len(&self) -> usize {
        self.conditionals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conditionals.is_empty()
    }
}

pub fn disintegrate(mu: &DiscreteMeasure, table: &MeasurementTable) -> Result<Disintegration> {
    if mu.total_mass() <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let pushforward = pushforward(mu, table)?;
    let conditionals = table
        .groups()
        .iter()
        .zip(pushforward.masses())
        .map(|(g, &mass)| {
            (mass > 0.0).then(|| g.members().iter().map(|&a| mu.weight(a) / mass).collect())
        })
        .collect();
    Ok(Disintegration {
        pushforward,
        conditionals,
    })
}

/// Largest value among atoms of strictly positive weight.
pub fn ess_sup_discrete(values: &[f64], weights: &[f64]) -> Result<f64> {
    if values.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: values.len(),
            found: weights.len(),
        });
    }
    values
        .iter()
        .zip(weights)
        .filter(|(_, w)| **w > 0.0)
        .map(|(v, _)| *v)
        .reduce(f64::max)
        .ok_or(Error::ZeroMass)
}

/// Order `p` of an `L^p` error, `1 <= p <= ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    Finite(f64),
    Infinity,
}

impl Order {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Order::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Order::Finite(p))
        } else {
            Err(Error::InvalidOrder(p))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Order::Finite(p) => p,
            Order::Infinity => f64::INFINITY,
        }
    }

    /// `v^p`, exact for the common orders 1 and 2.
    pub fn pow(self, v: f64) -> f64 {
        match self {
            Order::Finite(1.0) => v,
            Order::Finite(2.0) => v * v,
            Order::Finite(p) => v.powf(p),
            Order::Infinity => unreachable!("no power for p = ∞"),
        }
    }

    /// `v^(1/p)`.
    pub fn root(self, v: f64) -> f64 {
        match self {
            Order::Finite(1.0) => v,
            Order::Finite(2.0) => v.sqrt(),
            Order::Finite(p) => v.powf(p.recip()),
            Order::Infinity => v,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(p) => write!(f, "{p}"),
            Order::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Order::Infinity),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::spec("p", format!("cannot parse order {other:?}")))?;
                Order::new(p)
            }
        }
    }
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Order::Finite(p) => s.serialize_f64(*p),
            Order::Infinity => s.serialize_str("inf"),
        }
    }
}

/// `r_φ(x, e) = d^H(x, φ(F(x, e)))` on every atom.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualMap {
    n_x: usize,
    n_e: usize,
    values: Vec<f64>,
}

impl ResidualMap {
    /// Row-major residuals.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, atom: Atom) -> f64 {
        self.values[atom.x * self.n_e + atom.e]
    }
}

pub fn residual(
    problem: &Problem,
    table: &MeasurementTable,
    decoder: &SetValuedDecoder,
) -> Result<ResidualMap> {
    let mut values = vec![0.0; table.n_x() * table.n_e()];
    for g in table.groups() {
        let out = decoder.output(g.key())?;
        let per_x = g
            .x_points()
            .iter()
            .map(|x| hausdorff_point_set(problem.metric_x(), x, out))
            .collect::<Result<Vec<_>>>()?;
        for &a in g.members() {
            let pos = g.x_position(a.x).expect("member of its own group");
            values[table.atom_index(a)] = per_x[pos];
        }
    }
    Ok(ResidualMap {
        n_x: table.n_x(),
        n_e: table.n_e(),
        values,
    })
}

/// `Err^a(φ, p)`: the `L^p(mu)` norm of the residual map.
pub fn err_a(residuals: &ResidualMap, mu: &DiscreteMeasure, order: Order) -> Result<f64> {
    if residuals.n_x != mu.n_x() || residuals.n_e != mu.n_e() {
        return Err(Error::InvalidMeasure(
            "residual map and measure index different atom sets".into(),
        ));
    }
    match order {
        Order::Infinity => ess_sup_discrete(&residuals.values, mu.weights()),
        Order::Finite(_) => {
            let sum: f64 = residuals
                .values
                .iter()
                .zip(mu.weights())
                .map(|(r, w)| w * order.pow(*r))
                .sum();
            Ok(order.root(sum))
        }
    }
}
