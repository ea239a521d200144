//! JSON formats for systems, partitions, observables, couplings and reports.
//!
//! Exact values are written as `"p/q"` strings. Every `parse_*` function takes
//! untrusted text and fails with [`Error::Parse`] or a domain error, never a panic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::averages::{AverageReport, VdcExact, VdcReport};
use crate::coupling::{Coupling, ProductWord};
use crate::cyclotomic::Cyclotomic;
use crate::error::{Error, Result};
use crate::joinings::{Certificate, FalsifierReport};
use crate::observable::{Observable, Values};
use crate::partition::Partition;
use crate::perm::Permutation;
use crate::rational::{format_fraction, parse_fraction, Rational};
use crate::system::FiniteSystem;

/// Largest root-of-unity order accepted from input files.
pub const MAX_INPUT_ORDER: u32 = 1024;

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    n: usize,
    weights: Vec<String>,
    maps: Vec<Vec<usize>>,
}

fn system_from_value(v: Value) -> Result<FiniteSystem> {
    let file: SystemFile = serde_json::from_value(v).map_err(parse_err)?;
    if file.weights.len() != file.n {
        return Err(Error::LengthMismatch {
            expected: file.n,
            got: file.weights.len(),
        });
    }
    let weights = file.weights.iter().map(|w| parse_fraction(w)).collect::<Result<Vec<_>>>()?;
    let maps = file
        .maps
        .into_iter()
        .map(|m| {
            if m.len() != file.n {
                return Err(Error::LengthMismatch {
                    expected: file.n,
                    got: m.len(),
                });
            }
            Permutation::new(m)
        })
        .collect::<Result<Vec<_>>>()?;
    FiniteSystem::new(weights, maps)
}

/// Parses `{"n", "weights", "maps"}`. Measure-theoretic invariants are not checked here.
pub fn parse_system(text: &str) -> Result<FiniteSystem> {
    system_from_value(serde_json::from_str(text).map_err(parse_err)?)
}

pub fn system_to_json(sys: &FiniteSystem) -> Value {
    json!({
        "n": sys.len(),
        "weights": sys.weights().iter().map(format_fraction).collect::<Vec<_>>(),
        "maps": sys.maps().iter().map(|m| m.images().to_vec()).collect::<Vec<_>>(),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PartitionFile {
    label: Vec<usize>,
}

/// Parses `{"label": [...]}`; labels must be a surjection onto `0..B`.
pub fn parse_labels(text: &str) -> Result<Vec<usize>> {
    let file: PartitionFile = serde_json::from_str(text).map_err(parse_err)?;
    let blocks = file.label.iter().max().map_or(0, |m| m + 1);
    let mut seen = vec![false; blocks.min(file.label.len())];
    for &l in &file.label {
        match seen.get_mut(l) {
            Some(s) => *s = true,
            None => return Err(Error::Parse(format!("label {l} skips block ids"))),
        }
    }
    if let Some(b) = seen.iter().position(|s| !s) {
        return Err(Error::Parse(format!("block id {b} is unused")));
    }
    Ok(file.label)
}

pub fn parse_partition(text: &str, sys: &FiniteSystem) -> Result<Partition> {
    Partition::from_labels(sys, &parse_labels(text)?)
}

pub fn partition_to_json(p: &Partition) -> Value {
    json!({
        "label": p.labels(),
        "block_mass": p.block_masses().iter().map(format_fraction).collect::<Vec<_>>(),
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FloatEntry {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RootsSpec {
    order: u32,
    powers: Vec<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CyclotomicSpec {
    order: u32,
    values: Vec<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ObservableFile {
    Gaussian {
        re: Vec<String>,
        #[serde(default)]
        im: Option<Vec<String>>,
    },
    Float {
        float: Vec<FloatEntry>,
    },
    Roots {
        roots: RootsSpec,
    },
    Cyclotomic {
        cyclotomic: CyclotomicSpec,
    },
}

fn check_order(order: u32) -> Result<()> {
    if order == 0 || order > MAX_INPUT_ORDER {
        return Err(Error::Parse(format!("root-of-unity order {order} outside 1..={MAX_INPUT_ORDER}")));
    }
    Ok(())
}

fn observable_from_value(v: Value) -> Result<Observable> {
    let file: ObservableFile = serde_json::from_value(v).map_err(|_| {
        Error::Parse("observable must be one of {re, im}, {float}, {roots}, {cyclotomic}".into())
    })?;
    match file {
        ObservableFile::Gaussian { re, im } => {
            let re = re.iter().map(|s| parse_fraction(s)).collect::<Result<Vec<_>>>()?;
            let im = match im {
                Some(im) => im.iter().map(|s| parse_fraction(s)).collect::<Result<Vec<_>>>()?,
                None => vec![Rational::from_integer(0.into()); re.len()],
            };
            if im.len() != re.len() {
                return Err(Error::LengthMismatch {
                    expected: re.len(),
                    got: im.len(),
                });
            }
            Ok(Observable::exact(
                re.into_iter().zip(im).map(|(a, b)| Cyclotomic::gaussian(a, b)).collect(),
            ))
        }
        ObservableFile::Float { float } => Ok(Observable::float(
            float
                .into_iter()
                .map(|e| match e {
                    FloatEntry::Real(r) => Complex64::new(r, 0.0),
                    FloatEntry::Complex([r, i]) => Complex64::new(r, i),
                })
                .collect(),
        )),
        ObservableFile::Roots { roots } => {
            check_order(roots.order)?;
            Ok(Observable::roots_of_unity(roots.order, &roots.powers))
        }
        ObservableFile::Cyclotomic { cyclotomic } => {
            check_order(cyclotomic.order)?;
            let limit = 4 * cyclotomic.order as usize;
            let values = cyclotomic
                .values
                .iter()
                .map(|coeffs| {
                    if coeffs.len() > limit {
                        return Err(Error::Parse("too many coefficients".into()));
                    }
                    let poly = coeffs.iter().map(|s| parse_fraction(s)).collect::<Result<Vec<_>>>()?;
                    Ok(Cyclotomic::from_poly(cyclotomic.order, poly))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Observable::exact(values))
        }
    }
}

pub fn parse_observable(text: &str) -> Result<Observable> {
    observable_from_value(serde_json::from_str(text).map_err(parse_err)?)
}

/// A functions file: a JSON array of observables, or `{"functions": [...]}`.
pub fn parse_observables(text: &str) -> Result<Vec<Observable>> {
    let v: Value = serde_json::from_str(text).map_err(parse_err)?;
    let list = match v {
        Value::Array(list) => list,
        Value::Object(mut m) if m.len() == 1 && m.contains_key("functions") => match m.remove("functions") {
            Some(Value::Array(list)) => list,
            _ => return Err(Error::Parse("\"functions\" must be an array".into())),
        },
        _ => return Err(Error::Parse("expected an array of observables".into())),
    };
    list.into_iter().map(observable_from_value).collect()
}

/// `"p/q"` for rationals, `{"re", "im"}` for Gaussian rationals, otherwise the power basis.
pub fn scalar_to_json(c: &Cyclotomic) -> Value {
    if let Some(q) = c.as_rational() {
        return Value::String(format_fraction(q));
    }
    if let Some((re, im)) = c.as_gaussian() {
        return json!({"re": format_fraction(&re), "im": format_fraction(&im)});
    }
    let z = c.to_complex();
    json!({
        "cyclotomic": {
            "order": c.order(),
            "coeffs": c.coeffs().iter().map(format_fraction).collect::<Vec<_>>(),
        },
        "approx": [z.re, z.im],
    })
}

pub fn observable_to_json(f: &Observable) -> Value {
    match f.values() {
        Values::Float(v) => json!({"float": v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()}),
        Values::Exact(v) => {
            let gaussian: Option<Vec<(Rational, Rational)>> = v.iter().map(Cyclotomic::as_gaussian).collect();
            match gaussian {
                Some(parts) => json!({
                    "re": parts.iter().map(|(a, _)| format_fraction(a)).collect::<Vec<_>>(),
                    "im": parts.iter().map(|(_, b)| format_fraction(b)).collect::<Vec<_>>(),
                }),
                None => {
                    let order = f.field_order();
                    json!({
                        "cyclotomic": {
                            "order": order,
                            "values": v.iter().map(|c| c.lift(order).coeffs().iter().map(format_fraction).collect::<Vec<_>>()).collect::<Vec<_>>(),
                        }
                    })
                }
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MassEntry {
    tuple: Vec<usize>,
    mass: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CouplingFile {
    components: Vec<Value>,
    masses: Vec<MassEntry>,
    #[serde(default)]
    equivariances: Vec<ProductWord>,
}

fn coupling_from_text(
    text: &str,
    resolve: impl Fn(&str) -> Result<FiniteSystem>,
    verify: bool,
) -> Result<Coupling> {
    let file: CouplingFile = serde_json::from_str(text).map_err(parse_err)?;
    let components = file
        .components
        .into_iter()
        .map(|c| match c {
            Value::String(r) => resolve(&r),
            other => system_from_value(other),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut masses = std::collections::BTreeMap::new();
    for e in file.masses {
        let m = parse_fraction(&e.mass)?;
        let slot = masses.entry(e.tuple).or_insert_with(|| Rational::from_integer(0.into()));
        *slot += m;
    }
    if verify {
        Coupling::new(components, masses, file.equivariances)
    } else {
        Coupling::new_unverified(components, masses, file.equivariances)
    }
}

/// Parses a coupling. String components are references resolved by `resolve`.
pub fn parse_coupling(text: &str, resolve: impl Fn(&str) -> Result<FiniteSystem>) -> Result<Coupling> {
    coupling_from_text(text, resolve, true)
}

/// As [`parse_coupling`] with shape checks only: total mass, marginals and declared
/// equivariances are left for the caller to inspect.
pub fn parse_coupling_unchecked(text: &str, resolve: impl Fn(&str) -> Result<FiniteSystem>) -> Result<Coupling> {
    coupling_from_text(text, resolve, false)
}

/// Parses a coupling whose components are all inline.
pub fn parse_coupling_inline(text: &str) -> Result<Coupling> {
    parse_coupling(text, |r| Err(Error::Parse(format!("unresolved system reference {r:?}"))))
}

pub fn coupling_to_json(c: &Coupling) -> Value {
    json!({
        "components": c.components().iter().map(system_to_json).collect::<Vec<_>>(),
        "masses": c.masses().iter().map(|(t, m)| json!({"tuple": t, "mass": format_fraction(m)})).collect::<Vec<_>>(),
        "equivariances": c.equivariances(),
    })
}

pub fn falsifier_to_json(r: &FalsifierReport) -> Value {
    let witness = r.witness.as_ref().map(|w| {
        json!({
            "f_index": w.f_index,
            "g_index": w.g_index,
            "value": format_fraction(&w.value),
            "coupling": coupling_to_json(&w.coupling),
        })
    });
    json!({
        "witness": witness,
        "optimal_value": format_fraction(&r.optimal_value),
        "lp_pivots": r.lp_pivots,
        "pairs_examined": r.pairs_examined,
    })
}

pub fn certificate_to_json(c: &Certificate) -> Value {
    json!({
        "residual_sq": scalar_to_json(&c.residual_sq),
        "residual": c.residual,
        "argmax": c.argmax,
        "vanishes": c.vanishes,
    })
}

pub fn average_to_json(r: &AverageReport) -> Value {
    json!({
        "N": r.n,
        "P": r.period.map(|p| p.to_string()),
        "A_N": observable_to_json(&r.average),
        "A_limit": observable_to_json(&r.limit),
        "discrepancy_sq": scalar_to_json(&r.discrepancy_sq),
    })
}

pub fn vdc_to_json(r: &VdcReport) -> Value {
    json!({
        "lhs": r.lhs,
        "corr": [r.corr.re, r.corr.im],
        "rhs_bound": r.rhs_bound,
        "B": r.b,
        "holds": r.holds,
    })
}

pub fn vdc_exact_to_json(r: &VdcExact) -> Value {
    json!({
        "lhs_sq": scalar_to_json(&r.lhs_sq),
        "corr": scalar_to_json(&r.corr),
        "rhs_bound": scalar_to_json(&r.rhs_bound),
        "B_sq": scalar_to_json(&r.b_sq),
        "holds": r.holds,
    })
}
