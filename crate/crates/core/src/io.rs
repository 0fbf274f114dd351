//! File formats: canonical JSON for problems, couplings, duals, witnesses,
//! limb systems and demo reports; plain CSV for cost matrices and plot data.
//!
//! JSON output has sorted keys, floats written with 17 significant digits
//! and a trailing newline, so identical inputs give byte-identical files.
//! Exact rationals are written as `"p/q"` strings; on input both numbers
//! and such strings are accepted, decimals being read exactly.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde_json::{json, Map, Number, Value};

use crate::circle::{DemoReport, SubtwistReport, SupportPoint};
use crate::error::{Error, Result};
use crate::extremality::CycleWitness;
use crate::limb::{Limb, LimbKind, NumberedLimbSystem, TwoLimbMaps};
use crate::lp::DualPotentials;
use crate::measure::{Coupling, CostMatrix, DiscreteMarginal, PartialMap};
use crate::scalar::{format_rational, parse_rational, Rational, Scalar};

/// Scalars with a JSON representation.
pub trait JsonScalar: Scalar {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
}

impl JsonScalar for f64 {
    fn to_json(&self) -> Value {
        float(*self)
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(x) => x
                .as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::InvalidInput(format!("number {x} is not a finite double"))),
            Value::String(s) => parse_rational(s)
                .map(|r| Scalar::to_f64(&r))
                .ok_or_else(|| Error::InvalidInput(format!("cannot read {s:?} as a number"))),
            other => Err(Error::InvalidInput(format!("expected a number, found {other}"))),
        }
    }
}

impl JsonScalar for Rational {
    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }

    fn from_json(v: &Value) -> Result<Self> {
        let text = match v {
            Value::Number(x) => x.to_string(),
            Value::String(s) => s.clone(),
            other => return Err(Error::InvalidInput(format!("expected a number, found {other}"))),
        };
        parse_rational(&text).ok_or_else(|| Error::InvalidInput(format!("cannot read {text:?} as an exact number")))
    }
}

/// A float as a JSON number with 17 significant digits.
pub fn float(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Value::Number(Number::from_str(&format!("{x:.16e}")).expect("formatted float is valid JSON"))
}

/// Sorted keys, two-space indentation, trailing newline.
pub fn to_canonical_string(v: &Value) -> String {
    let mut text = serde_json::to_string_pretty(v).expect("values serialize");
    text.push('\n');
    text
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    fs::write(path, to_canonical_string(v))?;
    Ok(())
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn field<'a>(v: &'a Value, key: &str, what: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| Error::InvalidInput(format!("{what}: missing field {key:?}")))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::InvalidInput(format!("{what}: expected an array, found {v}")))
}

fn index(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::InvalidInput(format!("{what}: expected a nonnegative integer, found {v}")))
}

fn scalars<T: JsonScalar>(v: &Value, what: &str) -> Result<Vec<T>> {
    array(v, what)?.iter().map(T::from_json).collect()
}

fn index_pairs(v: &Value, what: &str) -> Result<Vec<(usize, usize)>> {
    array(v, what)?
        .iter()
        .map(|pair| match array(pair, what)?.as_slice() {
            [a, b] => Ok((index(a, what)?, index(b, what)?)),
            _ => Err(Error::InvalidInput(format!("{what}: expected an index pair, found {pair}"))),
        })
        .collect()
}

/// A transportation problem: marginals and cost.
#[derive(Debug, Clone)]
pub struct Problem<T> {
    pub mu: DiscreteMarginal<T>,
    pub nu: DiscreteMarginal<T>,
    pub cost: CostMatrix<T>,
}

/// `{"mu": [..], "nu": [..], "cost": [[..]]}`.
pub fn problem_to_json<T: JsonScalar>(p: &Problem<T>) -> Value {
    let cost: Vec<Value> = (0..p.cost.rows())
        .map(|i| Value::Array(p.cost.row(i).iter().map(T::to_json).collect()))
        .collect();
    json!({
        "mu": p.mu.weights().iter().map(T::to_json).collect::<Vec<_>>(),
        "nu": p.nu.weights().iter().map(T::to_json).collect::<Vec<_>>(),
        "cost": cost,
    })
}

pub fn problem_from_json<T: JsonScalar>(v: &Value) -> Result<Problem<T>> {
    let mu = DiscreteMarginal::new(scalars(field(v, "mu", "problem")?, "mu")?)?;
    let nu = DiscreteMarginal::new(scalars(field(v, "nu", "problem")?, "nu")?)?;
    let rows = array(field(v, "cost", "problem")?, "cost")?
        .iter()
        .map(|row| scalars(row, "cost row"))
        .collect::<Result<Vec<Vec<T>>>>()?;
    let cost = CostMatrix::from_rows(rows)?;
    if cost.shape() != (mu.len(), nu.len()) {
        return Err(Error::Dimension {
            context: "problem cost against marginals",
            expected: (mu.len(), nu.len()),
            found: cost.shape(),
        });
    }
    Ok(Problem { mu, nu, cost })
}

/// `{"m": m, "n": n, "entries": [[i, j, mass], ..]}`.
pub fn coupling_to_json<T: JsonScalar>(g: &Coupling<T>) -> Value {
    let entries: Vec<Value> = g
        .entries()
        .iter()
        .map(|(i, j, x)| json!([i, j, x.to_json()]))
        .collect();
    json!({ "m": g.rows(), "n": g.cols(), "entries": entries })
}

pub fn coupling_from_json<T: JsonScalar>(v: &Value) -> Result<Coupling<T>> {
    let m = index(field(v, "m", "coupling")?, "m")?;
    let n = index(field(v, "n", "coupling")?, "n")?;
    let entries = array(field(v, "entries", "coupling")?, "entries")?
        .iter()
        .map(|e| match array(e, "entry")?.as_slice() {
            [i, j, x] => Ok((index(i, "entry row")?, index(j, "entry column")?, T::from_json(x)?)),
            _ => Err(Error::InvalidInput(format!("coupling entry must be [i, j, mass], found {e}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Coupling::from_entries(m, n, entries)
}

/// `{"q": [..], "r": [..], "value": v}`.
pub fn duals_to_json<T: JsonScalar>(p: &DualPotentials<T>, value: &T) -> Value {
    json!({
        "q": p.q.iter().map(T::to_json).collect::<Vec<_>>(),
        "r": p.r.iter().map(T::to_json).collect::<Vec<_>>(),
        "value": value.to_json(),
    })
}

pub fn duals_from_json<T: JsonScalar>(v: &Value) -> Result<(DualPotentials<T>, T)> {
    let q = scalars(field(v, "q", "duals")?, "q")?;
    let r = scalars(field(v, "r", "duals")?, "r")?;
    let value = T::from_json(field(v, "value", "duals")?)?;
    Ok((DualPotentials { q, r }, value))
}

/// `{"cycle": [[i, j], ..], "gamma0": coupling, "gamma1": coupling}`; the
/// cycle lists its `2k` cells in walk order, `+` at even positions.
pub fn witness_to_json<T: JsonScalar>(cycle: &CycleWitness, gamma0: &Coupling<T>, gamma1: &Coupling<T>) -> Value {
    let cells: Vec<Value> = cycle.edges().into_iter().map(|(i, j)| json!([i, j])).collect();
    json!({
        "cycle": cells,
        "gamma0": coupling_to_json(gamma0),
        "gamma1": coupling_to_json(gamma1),
    })
}

pub fn witness_from_json<T: JsonScalar>(v: &Value) -> Result<(CycleWitness, Coupling<T>, Coupling<T>)> {
    let cycle = CycleWitness::from_edges(&index_pairs(field(v, "cycle", "witness")?, "cycle")?)?;
    let g0 = coupling_from_json(field(v, "gamma0", "witness")?)?;
    let g1 = coupling_from_json(field(v, "gamma1", "witness")?)?;
    Ok((cycle, g0, g1))
}

/// `{"m", "n", "limbs": [{"k", "kind", "map": [[i, j], ..]}], "I_odd", "I_even"}`.
/// Map entries are grid cells `[row, column]` for both kinds of limb.
pub fn system_to_json(s: &NumberedLimbSystem) -> Value {
    let limbs: Vec<Value> = s
        .limbs
        .iter()
        .map(|l| {
            let cells: Vec<Value> = l.cells().into_iter().map(|(i, j)| json!([i, j])).collect();
            json!({ "k": l.index, "kind": l.kind.as_str(), "map": cells })
        })
        .collect();
    json!({
        "m": s.m,
        "n": s.n,
        "limbs": limbs,
        "I_odd": s.i_odd,
        "I_even": s.i_even,
    })
}

/// Parses a limb system. Structural errors are reported here; the labelling
/// rules are left to [`crate::limb::validate_system`].
pub fn system_from_json(v: &Value) -> Result<NumberedLimbSystem> {
    let m = index(field(v, "m", "limb system")?, "m")?;
    let n = index(field(v, "n", "limb system")?, "n")?;
    let labels = |key: &str| -> Result<Vec<usize>> {
        array(field(v, key, "limb system")?, key)?
            .iter()
            .map(|x| index(x, key))
            .collect()
    };
    let (i_odd, i_even) = (labels("I_odd")?, labels("I_even")?);
    let limbs = array(field(v, "limbs", "limb system")?, "limbs")?
        .iter()
        .map(|l| {
            let k = index(field(l, "k", "limb")?, "k")?;
            let kind = match field(l, "kind", "limb")?.as_str() {
                Some("graph") => LimbKind::Graph,
                Some("antigraph") => LimbKind::Antigraph,
                _ => return Err(Error::InvalidInput(format!("limb {k}: kind must be \"graph\" or \"antigraph\""))),
            };
            let cells = index_pairs(field(l, "map", "limb")?, "map")?;
            if let Some(&(i, j)) = cells.iter().find(|&&(i, j)| i >= m || j >= n) {
                return Err(Error::InvalidInput(format!("limb {k}: cell ({i}, {j}) outside the {m}x{n} grid")));
            }
            let map = match kind {
                LimbKind::Graph => PartialMap::from_pairs(m, n, cells)?,
                LimbKind::Antigraph => PartialMap::from_pairs(n, m, cells.into_iter().map(|(i, j)| (j, i)))?,
            };
            Ok(Limb { index: k, kind, map })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NumberedLimbSystem {
        m,
        n,
        limbs,
        i_odd,
        i_even,
    })
}

fn pairs_json(pairs: &[(usize, usize)]) -> Value {
    Value::Array(pairs.iter().map(|(a, b)| json!([a, b])).collect())
}

fn subtwist_json(s: &SubtwistReport) -> Value {
    json!({
        "ok": s.ok(),
        "violations": pairs_json(&s.violations),
        "degenerate": pairs_json(&s.degenerate),
    })
}

fn maps_json(maps: &TwoLimbMaps) -> Value {
    let f1: Vec<(usize, usize)> = maps.f1.pairs().collect();
    let f2: Vec<(usize, usize)> = maps.f2.pairs().collect();
    json!({ "f1": pairs_json(&f1), "f2": pairs_json(&f2) })
}

/// The demo report. `f1` pairs are `[row, column]`, `f2` pairs `[column, row]`.
pub fn demo_report_to_json<T: JsonScalar>(r: &DemoReport<T>) -> Value {
    let c = &r.config;
    let mut config = Map::new();
    config.insert("n".into(), json!(c.n));
    config.insert("mu_center".into(), float(c.mu_center));
    config.insert("mu_kappa".into(), float(c.mu_kappa));
    config.insert("nu_center".into(), float(c.nu_center));
    config.insert("nu_kappa".into(), float(c.nu_kappa));
    config.insert("eps_mass".into(), float(c.tol.eps_mass));
    config.insert("eps_cost".into(), float(c.tol.eps_cost));
    config.insert("scalar".into(), json!(T::NAME));
    if T::EXACT {
        config.insert("denominator".into(), json!(c.denominator));
    }
    json!({
        "config": config,
        "subtwist": subtwist_json(&r.subtwist),
        "primal_value": r.solve.primal_value.to_json(),
        "dual_value": r.solve.dual_value.to_json(),
        "iterations": r.solve.iterations,
        "extremal": r.extremal,
        "two_limb": r.two_limb.as_ref().map_or(Value::Null, maps_json),
        "cross_mass": r.cross_mass.as_ref().map_or(Value::Null, T::to_json),
        "limb_count": r.limb_count,
        "coupling": coupling_to_json(&r.solve.coupling),
    })
}

/// Reads a headerless rectangular grid of numbers.
pub fn read_cost_csv<T: JsonScalar, R: Read>(reader: R) -> Result<CostMatrix<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .enumerate()
            .map(|(col, text)| {
                parse_rational(text)
                    .map(|r| T::from_json(&Value::String(format_rational(&r))))
                    .unwrap_or_else(|| {
                        Err(Error::InvalidInput(format!(
                            "cost CSV line {}, column {}: cannot read {text:?}",
                            line + 1,
                            col + 1
                        )))
                    })
            })
            .collect::<Result<Vec<T>>>()?;
        rows.push(row);
    }
    CostMatrix::from_rows(rows)
}

pub fn write_cost_csv<T: JsonScalar, W: Write>(writer: W, c: &CostMatrix<T>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for i in 0..c.rows() {
        w.write_record(c.row(i).iter().map(|x| match x.to_json() {
            Value::String(s) => s,
            other => other.to_string(),
        }))?;
    }
    w.flush()?;
    Ok(())
}

/// `theta,phi,mass,limb_kind` with a header row.
pub fn write_support_csv<W: Write>(writer: W, points: &[SupportPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["theta", "phi", "mass", "limb_kind"])?;
    for p in points {
        w.write_record([
            format!("{:.16e}", p.theta),
            format!("{:.16e}", p.phi),
            format!("{:.16e}", p.mass),
            p.limb_kind.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
