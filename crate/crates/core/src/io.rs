//! JSON file formats for functions, one-dimensional seeds and certificates,
//! the verdict report, and CSV export.
//!
//! Rationals are always strings `"p/r"` in lowest terms (`"p"` for
//! integers), so files are exact and byte-stable.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::checks::ViolationKind;
use crate::driver::{Certificate, Extreme, Mode, Verdict};
use crate::error::{Error, Result};
use crate::generators::OneDFunction;
use crate::geometry::GridPoint;
use crate::perturb::PerturbationKind;
use crate::plf::PLFunction;
use crate::scalar::{format_rat, parse_rat, rat, Rat};

pub const SCHEMA_VERSION: u32 = 1;

/// Ordered `"i,j" -> value` entries, keeping duplicates so they can be
/// reported instead of silently overwritten.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Entries(pub Vec<(String, String)>);

impl Serialize for Entries {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for Entries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Entries;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map from \"i,j\" to rational strings")
            }
            fn visit_map<A: MapAccess<'de>>(
                self,
                mut a: A,
            ) -> std::result::Result<Entries, A::Error> {
                let mut out = Vec::new();
                while let Some(kv) = a.next_entry::<String, String>()? {
                    out.push(kv);
                }
                Ok(Entries(out))
            }
        }
        d.deserialize_map(V)
    }
}

/// On-disk form of a [`PLFunction`] over `P_q` sampled at `(1/(nq)) Z^2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionFile {
    pub schema_version: u32,
    pub q: u32,
    pub resolution: u32,
    pub f: [String; 2],
    pub values: Entries,
}

/// On-disk form of a one-dimensional seed; `values[k] = ζ(k/q)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OneDFile {
    pub schema_version: u32,
    pub q: u32,
    pub f0: String,
    pub values: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    NotExtreme,
    Extreme,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub schema_version: u32,
    pub kind: CertificateKind,
    pub construction: PerturbationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi1: Option<FunctionFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi2: Option<FunctionFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variables: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_digest: Option<String>,
}

fn field_rat(field: &str, s: &str) -> Result<Rat> {
    parse_rat(s).map_err(|_| Error::Parse(format!("{field}: malformed rational {s:?}")))
}

fn check_schema(v: u32) -> Result<()> {
    if v == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(Error::Parse(format!(
            "schema_version: unsupported version {v}, expected {SCHEMA_VERSION}"
        )))
    }
}

fn parse_key(key: &str, side: u32) -> Result<usize> {
    let bad = || {
        Error::Parse(format!(
            "values: malformed key {key:?}, expected \"i,j\" with 0 <= i, j < {side}"
        ))
    };
    let (a, b) = key.split_once(',').ok_or_else(bad)?;
    let parse = |s: &str| -> Result<u32> {
        if s.is_empty()
            || !s.bytes().all(|c| c.is_ascii_digit())
            || (s.len() > 1 && s.starts_with('0'))
        {
            return Err(bad());
        }
        s.parse::<u32>().ok().filter(|&x| x < side).ok_or_else(bad)
    };
    let (i, j) = (parse(a)?, parse(b)?);
    Ok((i * side + j) as usize)
}

impl FunctionFile {
    pub fn from_function(pi: &PLFunction<Rat>) -> Self {
        let side = pi.side();
        let f = pi.f();
        FunctionFile {
            schema_version: SCHEMA_VERSION,
            q: pi.q(),
            resolution: pi.n(),
            f: [
                format_rat(&rat(i64::from(f.i), i64::from(side))),
                format_rat(&rat(i64::from(f.j), i64::from(side))),
            ],
            values: Entries(
                pi.points()
                    .map(|p| (format!("{},{}", p.i, p.j), format_rat(pi.value(p))))
                    .collect(),
            ),
        }
    }

    pub fn to_function(&self) -> Result<PLFunction<Rat>> {
        check_schema(self.schema_version)?;
        if self.q == 0 {
            return Err(Error::Parse("q: must be positive".into()));
        }
        if self.resolution != 1 && self.resolution != 4 {
            return Err(Error::Parse(format!(
                "resolution: must be 1 or 4, got {}",
                self.resolution
            )));
        }
        let side = self.q * self.resolution;
        let mut f = [0u32; 2];
        for (k, s) in self.f.iter().enumerate() {
            let x = field_rat(&format!("f[{k}]"), s)?;
            let scaled = x.clone() * Rat::from_integer(side.into());
            let zero = Rat::from_integer(0.into());
            if !scaled.is_integer() || x < zero || x >= Rat::from_integer(1.into()) {
                return Err(Error::Parse(format!(
                    "f[{k}]: {s} is not a point of the 1/{side} grid in [0, 1)"
                )));
            }
            f[k] = u32::try_from(scaled.to_integer()).expect("checked range");
        }
        let n = (side * side) as usize;
        let mut slots: Vec<Option<Rat>> = vec![None; n];
        for (key, val) in &self.values.0 {
            let idx = parse_key(key, side)?;
            if slots[idx].is_some() {
                return Err(Error::Parse(format!("values: duplicate key {key:?}")));
            }
            slots[idx] = Some(field_rat(&format!("values[{key:?}]"), val)?);
        }
        let mut values = Vec::with_capacity(n);
        for (idx, v) in slots.into_iter().enumerate() {
            match v {
                Some(v) => values.push(v),
                None => {
                    let p = GridPoint::from_index(idx, self.resolution, self.q);
                    return Err(Error::Parse(format!(
                        "values: missing key \"{},{}\"",
                        p.i, p.j
                    )));
                }
            }
        }
        if !values[0].is_zero() {
            return Err(Error::Parse("values[\"0,0\"]: must be \"0\"".into()));
        }
        let f = GridPoint::new(i64::from(f[0]), i64::from(f[1]), self.resolution, self.q);
        PLFunction::new(self.q, self.resolution, f, values)
    }
}

impl OneDFile {
    pub fn from_function(z: &OneDFunction<Rat>) -> Self {
        OneDFile {
            schema_version: SCHEMA_VERSION,
            q: z.q,
            f0: format_rat(&rat(i64::from(z.f_index), i64::from(z.q))),
            values: z.values.iter().map(format_rat).collect(),
        }
    }

    pub fn to_function(&self) -> Result<OneDFunction<Rat>> {
        check_schema(self.schema_version)?;
        if self.q == 0 {
            return Err(Error::Parse("q: must be positive".into()));
        }
        let f0 = field_rat("f0", &self.f0)?;
        let scaled = f0 * Rat::from_integer(self.q.into());
        if !scaled.is_integer() {
            return Err(Error::Parse(format!(
                "f0: {} is not on the 1/{} grid",
                self.f0, self.q
            )));
        }
        let f_index = u32::try_from(scaled.to_integer())
            .map_err(|_| Error::Parse(format!("f0: {} is out of range", self.f0)))?;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, s)| field_rat(&format!("values[{k}]"), s))
            .collect::<Result<Vec<_>>>()?;
        OneDFunction::new(self.q, f_index, values)
    }
}

impl CertificateFile {
    pub fn from_certificate(c: &Certificate) -> Self {
        match c {
            Certificate::NotExtreme {
                pi1,
                pi2,
                kind,
                epsilon,
            } => CertificateFile {
                schema_version: SCHEMA_VERSION,
                kind: CertificateKind::NotExtreme,
                construction: *kind,
                epsilon: Some(format_rat(epsilon)),
                pi1: Some(FunctionFile::from_function(pi1)),
                pi2: Some(FunctionFile::from_function(pi2)),
                resolution: None,
                rank: None,
                variables: None,
                system_digest: None,
            },
            Certificate::Extreme {
                resolution,
                rank,
                variables,
                system_digest,
            } => CertificateFile {
                schema_version: SCHEMA_VERSION,
                kind: CertificateKind::Extreme,
                construction: PerturbationKind::Kernel,
                epsilon: None,
                pi1: None,
                pi2: None,
                resolution: Some(*resolution),
                rank: Some(*rank),
                variables: Some(*variables),
                system_digest: Some(system_digest.clone()),
            },
        }
    }

    pub fn to_certificate(&self) -> Result<Certificate> {
        check_schema(self.schema_version)?;
        fn need<'a, T>(v: &'a Option<T>, field: &str) -> Result<&'a T> {
            v.as_ref()
                .ok_or_else(|| Error::Parse(format!("{field}: missing")))
        }
        match self.kind {
            CertificateKind::NotExtreme => Ok(Certificate::NotExtreme {
                pi1: need(&self.pi1, "pi1")?
                    .to_function()
                    .map_err(|e| Error::Parse(format!("pi1.{}", strip(e))))?,
                pi2: need(&self.pi2, "pi2")?
                    .to_function()
                    .map_err(|e| Error::Parse(format!("pi2.{}", strip(e))))?,
                kind: self.construction,
                epsilon: field_rat("epsilon", need(&self.epsilon, "epsilon")?)?,
            }),
            CertificateKind::Extreme => Ok(Certificate::Extreme {
                resolution: *need(&self.resolution, "resolution")?,
                rank: *need(&self.rank, "rank")?,
                variables: *need(&self.variables, "variables")?,
                system_digest: need(&self.system_digest, "system_digest")?.clone(),
            }),
        }
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Parse(s) => s,
        other => other.to_string(),
    }
}

fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn parse_function(text: &str) -> Result<PLFunction<Rat>> {
    from_json::<FunctionFile>(text)?.to_function()
}

pub fn function_to_json(pi: &PLFunction<Rat>) -> String {
    to_json(&FunctionFile::from_function(pi))
}

pub fn parse_one_d(text: &str) -> Result<OneDFunction<Rat>> {
    from_json::<OneDFile>(text)?.to_function()
}

pub fn one_d_to_json(z: &OneDFunction<Rat>) -> String {
    to_json(&OneDFile::from_function(z))
}

pub fn parse_certificate(text: &str) -> Result<Certificate> {
    from_json::<CertificateFile>(text)?.to_certificate()
}

pub fn certificate_to_json(c: &Certificate) -> String {
    to_json(&CertificateFile::from_certificate(c))
}

#[derive(Clone, Debug, Serialize)]
pub struct ViolationReport {
    pub kind: ViolationKind,
    pub witness: Vec<String>,
    pub slack: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    pub triangle: String,
    pub construction: PerturbationKind,
}

/// The JSON report printed by `check`.
#[derive(Clone, Debug, Serialize)]
pub struct VerdictReport {
    pub minimal: bool,
    pub violation_counts: BTreeMap<ViolationKind, usize>,
    /// The first few violations, in report order.
    pub violations: Vec<ViolationReport>,
    pub diagonally_constrained: Option<bool>,
    pub offending_triple: Option<String>,
    pub extreme: Option<Extreme>,
    pub path: Mode,
    pub working_q: u32,
    pub kernel_dimension: Option<usize>,
    pub witness: Option<WitnessReport>,
    pub certificate: Option<CertificateKind>,
    pub construction: Option<PerturbationKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<&'static str, f64>>,
}

const SHOWN_VIOLATIONS: usize = 16;

impl VerdictReport {
    pub fn new(v: &Verdict, timings: bool) -> Self {
        let mut violation_counts = BTreeMap::new();
        for x in &v.minimality.violations {
            *violation_counts.entry(x.kind).or_insert(0) += 1;
        }
        let violations = v
            .minimality
            .violations
            .iter()
            .take(SHOWN_VIOLATIONS)
            .map(|x| ViolationReport {
                kind: x.kind,
                witness: x
                    .witness
                    .iter()
                    .map(|p| format!("{},{}", p.i, p.j))
                    .collect(),
                slack: format_rat(&x.slack),
            })
            .collect();
        let (certificate, construction) = match &v.certificate {
            Some(Certificate::NotExtreme { kind, .. }) => {
                (Some(CertificateKind::NotExtreme), Some(*kind))
            }
            Some(Certificate::Extreme { .. }) => (
                Some(CertificateKind::Extreme),
                Some(PerturbationKind::Kernel),
            ),
            None => (None, None),
        };
        VerdictReport {
            minimal: v.minimal,
            violation_counts,
            violations,
            diagonally_constrained: v.minimal.then_some(v.diagonally_constrained),
            offending_triple: v.offending_triple.as_ref().map(|t| t.to_string()),
            extreme: v.extreme,
            path: v.path,
            working_q: v.working_q,
            kernel_dimension: v.kernel_dimension,
            witness: v.witness.map(|(t, c)| WitnessReport {
                triangle: t.to_string(),
                construction: match c {
                    crate::imposing::WitnessCategory::OutsideBoth => PerturbationKind::Psi2D,
                    crate::imposing::WitnessCategory::InBarS1 => PerturbationKind::PhiDiagonal,
                },
            }),
            certificate,
            construction,
            timings_ms: timings.then(|| {
                let mut m = BTreeMap::new();
                for (name, d) in &v.timings {
                    *m.entry(*name).or_insert(0.0) += d.as_secs_f64() * 1e3;
                }
                m.values_mut()
                    .for_each(|t: &mut f64| *t = (*t * 1e3).round() / 1e3);
                m
            }),
        }
    }
}

/// CSV of `Δπ(u, f ⊖ u)` for every `u` of the `(1/(4q))`-grid, one row
/// per `u`, with exact rational columns.
pub fn heatmap_csv(pi: &PLFunction<Rat>) -> Result<String> {
    if 4 % pi.n() != 0 {
        return Err(Error::Precondition(format!(
            "resolution {} does not divide 4",
            pi.n()
        )));
    }
    let fine = pi.refine(4 / pi.n());
    let side = i64::from(fine.side());
    let f = fine.f();
    let r = |k: u32| format_rat(&rat(i64::from(k), side));
    let mut out = String::from("u1,u2,v1,v2,delta\n");
    for u in fine.points() {
        let v = f.ominus(&u);
        let d = fine.delta_grid(u, v);
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r(u.i),
            r(u.j),
            r(v.i),
            r(v.j),
            format_rat(&d)
        ));
    }
    Ok(out)
}
