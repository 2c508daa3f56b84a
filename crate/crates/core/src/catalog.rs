//! Algebra specifications (JSON, 1-based indices) and built-in fixtures.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::courant::DorfmanBracket;
use crate::error::{Error, Result};
use crate::liealg::LieBracket;
use crate::multilinear::{multi_indices, KForm, MAX_DIM};
use crate::soliton::SolitonClass;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraSpec {
    pub name: String,
    pub dim: usize,
    /// `mu(e_i, e_j) = ... + v e_k`, 1-based, `i < j`.
    #[serde(default)]
    pub mu_entries: Vec<Entry>,
    /// `H = ... + v e^{ijk}`, 1-based, `i < j < k`.
    #[serde(default, rename = "H_entries")]
    pub h_entries: Vec<Entry>,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl AlgebraSpec {
    pub fn new(name: &str, dim: usize) -> Self {
        Self {
            name: name.to_string(),
            dim,
            mu_entries: Vec::new(),
            h_entries: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    /// `mu(e_i, e_j) = v e_k` (1-based); builder helper.
    pub fn mu(mut self, i: usize, j: usize, k: usize, v: f64) -> Self {
        self.mu_entries.push(Entry { i, j, k, v });
        self
    }

    /// `+ v e^{ijk}` (1-based); builder helper.
    pub fn h(mut self, i: usize, j: usize, k: usize, v: f64) -> Self {
        self.h_entries.push(Entry { i, j, k, v });
        self
    }

    pub fn tag(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    /// Checks indices and duplicates, then builds the bracket with the
    /// Jacobi and closedness checks of [`DorfmanBracket::new`].
    pub fn to_dorfman(&self) -> Result<DorfmanBracket> {
        let n = self.dim;
        if n == 0 || n > MAX_DIM {
            return Err(Error::Index(format!("dimension {n} outside 1..={MAX_DIM}")));
        }
        let mut mu = LieBracket::zero(n);
        let mut seen = BTreeSet::new();
        for e in &self.mu_entries {
            if !(1 <= e.i && e.i < e.j && e.j <= n && 1 <= e.k && e.k <= n) {
                return Err(Error::Index(format!(
                    "mu entry ({}, {}, {}) needs 1 <= i < j <= {n} and 1 <= k <= {n}",
                    e.i, e.j, e.k
                )));
            }
            if !seen.insert((e.i, e.j, e.k)) {
                return Err(Error::Duplicate(format!("mu entry ({}, {}, {})", e.i, e.j, e.k)));
            }
            mu.set(e.i - 1, e.j - 1, e.k - 1, e.v);
        }
        let mut h = KForm::zero(n, 3);
        let mut seen = BTreeSet::new();
        for e in &self.h_entries {
            if !(1 <= e.i && e.i < e.j && e.j < e.k && e.k <= n) {
                return Err(Error::Index(format!(
                    "H entry ({}, {}, {}) needs 1 <= i < j < k <= {n}",
                    e.i, e.j, e.k
                )));
            }
            if !seen.insert((e.i, e.j, e.k)) {
                return Err(Error::Duplicate(format!("H entry ({}, {}, {})", e.i, e.j, e.k)));
            }
            h.set(&[e.i - 1, e.j - 1, e.k - 1], e.v);
        }
        DorfmanBracket::new(mu, h)
    }

    /// Spec listing every non-zero component of `d`.
    pub fn from_dorfman(name: &str, d: &DorfmanBracket) -> Self {
        let n = d.dim();
        let mut spec = Self::new(name, n);
        for p in multi_indices(n, 2) {
            for k in 0..n {
                let v = d.mu().get(p[0], p[1], k);
                if v != 0.0 {
                    spec = spec.mu(p[0] + 1, p[1] + 1, k + 1, v);
                }
            }
        }
        for t in multi_indices(n, 3) {
            let v = d.h().get(&t);
            if v != 0.0 {
                spec = spec.h(t[0] + 1, t[1] + 1, t[2] + 1, v);
            }
        }
        spec
    }
}

pub fn read_spec(path: &Path) -> Result<AlgebraSpec> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_spec(path: &Path) -> Result<DorfmanBracket> {
    read_spec(path)?.to_dorfman()
}

pub fn save_spec(path: &Path, spec: &AlgebraSpec) -> Result<()> {
    let text = serde_json::to_string_pretty(spec)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedCertificate {
    pub lambda: f64,
    /// Full expected `D`, when tabulated.
    pub d: Option<Vec<Vec<f64>>>,
    /// Expected eigenvalues of `D`, ascending.
    pub d_eigenvalues: Option<Vec<f64>>,
    pub class: SolitonClass,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub spec: AlgebraSpec,
    /// Whether the soliton equations are expected to hold; `None` for
    /// parametric families.
    pub expect_soliton: Option<bool>,
    pub expected: Option<ExpectedCertificate>,
    pub note: String,
}

fn diag(v: &[f64]) -> Vec<Vec<f64>> {
    let n = v.len();
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { v[i] } else { 0.0 }).collect())
        .collect()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

fn soliton(spec: AlgebraSpec, lambda: f64, d: Option<Vec<Vec<f64>>>, class: SolitonClass) -> CatalogEntry {
    let d_eigenvalues = d.as_ref().map(|m| {
        let n = m.len();
        let mat = nalgebra::DMatrix::from_fn(n, n, |i, j| m[i][j]);
        sorted(mat.symmetric_eigenvalues().iter().copied().collect())
    });
    CatalogEntry {
        spec,
        expect_soliton: Some(true),
        expected: Some(ExpectedCertificate {
            lambda,
            d,
            d_eigenvalues,
            class,
        }),
        note: String::new(),
    }
}

fn plain(spec: AlgebraSpec) -> CatalogEntry {
    CatalogEntry {
        spec,
        expect_soliton: None,
        expected: None,
        note: String::new(),
    }
}

fn control(spec: AlgebraSpec, note: &str) -> CatalogEntry {
    CatalogEntry {
        spec,
        expect_soliton: Some(false),
        expected: None,
        note: note.to_string(),
    }
}

type Params = BTreeMap<String, f64>;

fn param(p: &Params, key: &str, default: f64) -> f64 {
    p.get(key).copied().unwrap_or(default)
}

fn with_h4(spec: AlgebraSpec, p: &Params) -> AlgebraSpec {
    // H = l4 e123 + l3 e124 + l2 e134 + l1 e234
    let mut s = spec;
    for (key, (i, j, k)) in [("l4", (1, 2, 3)), ("l3", (1, 2, 4)), ("l2", (1, 3, 4)), ("l1", (2, 3, 4))] {
        let v = param(p, key, 0.0);
        if v != 0.0 {
            s = s.h(i, j, k, v);
        }
    }
    s
}

fn n3r_circle(theta: f64) -> CatalogEntry {
    let (l1, l2) = (theta.cos(), theta.sin());
    let mut spec = AlgebraSpec::new("n3r-circle", 4).mu(1, 2, 3, 1.0).tag("theta", theta);
    if l2 != 0.0 {
        spec = spec.h(1, 3, 4, l2);
    }
    if l1 != 0.0 {
        spec = spec.h(2, 3, 4, l1);
    }
    // D = Ric^B + 3/2 Id; H^2 has the cross term 2 l1 l2 in the (1,2) slot
    let d = vec![
        vec![1.0 - l2 * l2 / 2.0, -l1 * l2 / 2.0, 0.0, 0.0],
        vec![-l1 * l2 / 2.0, 1.0 - l1 * l1 / 2.0, 0.0, 0.0],
        vec![0.0, 0.0, 1.5, 0.0],
        vec![0.0, 0.0, 0.0, 1.0],
    ];
    let mut e = soliton(spec, -1.5, Some(d), SolitonClass::Expanding);
    if (l1 * l2).abs() > 1e-15 {
        e.note = "D has the off-diagonal entry -l1 l2 / 2; eigenvalues {1/2, 1, 1, 3/2}".into();
    }
    e
}

/// Builds a named entry; parameters are given as `name:key=value,...`.
pub fn entry(query: &str) -> Result<CatalogEntry> {
    let (name, rest) = match query.split_once(':') {
        Some((n, r)) => (n, r),
        None => (query, ""),
    };
    let mut p = Params::new();
    for kv in rest.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::UnknownEntry(format!("malformed parameter '{kv}'")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::UnknownEntry(format!("parameter '{k}' is not a number")))?;
        p.insert(k.trim().to_string(), v);
    }
    let s3 = 3f64.sqrt() / 2.0;
    let e = match name {
        "abelian" => {
            let n = param(&p, "n", 3.0) as usize;
            let mut e = plain(AlgebraSpec::new("abelian", n).tag("n", n));
            e.expect_soliton = Some(false);
            e.note = "zero bracket: excluded from the soliton equations".into();
            e
        }
        "abelian-h" => {
            let mut e = soliton(
                AlgebraSpec::new("abelian-h", 3).h(1, 2, 3, 1.0),
                -1.5,
                Some(diag(&[1.0, 1.0, 1.0])),
                SolitonClass::Expanding,
            );
            e.note = "mu = 0 branch: lambda fitted from the torsion equation".into();
            e
        }
        "n3" => {
            let (a, b) = (param(&p, "a", 1.0), param(&p, "b", 0.0));
            let mut s = AlgebraSpec::new("n3", 3).mu(1, 2, 3, a).tag("a", a).tag("b", b);
            if b != 0.0 {
                s = s.h(1, 2, 3, b);
            }
            plain(s)
        }
        "n3-soliton" => soliton(
            AlgebraSpec::new("n3-soliton", 3).mu(1, 2, 3, 1.0).h(1, 2, 3, 1.0),
            -2.0,
            Some(diag(&[1.0, 1.0, 2.0])),
            SolitonClass::Expanding,
        ),
        "n3-control" => control(
            AlgebraSpec::new("n3-control", 3).mu(1, 2, 3, 1.0).h(1, 2, 3, 2.0),
            "control: torsion coefficient differs from the bracket coefficient",
        ),
        "n3r" => {
            let a = param(&p, "a", 1.0);
            plain(with_h4(AlgebraSpec::new("n3r", 4).mu(1, 2, 3, a).tag("a", a), &p))
        }
        "n3r-soliton-1" => soliton(
            AlgebraSpec::new("n3r-soliton-1", 4).mu(1, 2, 3, 1.0).h(1, 2, 3, 1.0),
            -2.0,
            Some(diag(&[1.0, 1.0, 2.0, 2.0])),
            SolitonClass::Expanding,
        ),
        "n3r-circle" => n3r_circle(param(&p, "theta", 0.0)),
        "n3r-classic" => soliton(
            AlgebraSpec::new("n3r-classic", 4).mu(1, 2, 3, 1.0),
            -1.5,
            Some(diag(&[1.0, 1.0, 2.0, 1.5])),
            SolitonClass::Expanding,
        ),
        "n3r-harmonic-start" => control(
            AlgebraSpec::new("n3r-harmonic-start", 4)
                .mu(1, 2, 3, 1.0)
                .h(1, 2, 3, 1.0)
                .h(2, 3, 4, 1.0),
            "harmonic non-soliton start for the normalized flow",
        ),
        "n4" => {
            let (a, b, c) = (param(&p, "a", 1.0), param(&p, "b", 0.0), param(&p, "c", 1.0));
            let mut s = AlgebraSpec::new("n4", 4).tag("a", a).tag("b", b).tag("c", c);
            for (j, k, v) in [(2, 3, a), (2, 4, b), (3, 4, c)] {
                if v != 0.0 {
                    s = s.mu(1, j, k, v);
                }
            }
            plain(with_h4(s, &p))
        }
        "n4-soliton-1" => soliton(
            AlgebraSpec::new("n4-soliton-1", 4)
                .mu(1, 2, 3, 1.0)
                .mu(1, 3, 4, s3)
                .h(1, 3, 4, s3),
            -1.5,
            Some(diag(&[0.25, 1.0, 1.25, 1.5])),
            SolitonClass::Expanding,
        ),
        "n4-soliton-2" => soliton(
            AlgebraSpec::new("n4-soliton-2", 4)
                .mu(1, 2, 3, 1.0)
                .mu(1, 3, 4, 1.0)
                .h(2, 3, 4, 1.0),
            -1.5,
            Some(diag(&[0.5, 0.5, 1.0, 1.5])),
            SolitonClass::Expanding,
        ),
        "n4-lambda3-control" => control(
            AlgebraSpec::new("n4-lambda3-control", 4)
                .mu(1, 2, 3, 1.0)
                .mu(1, 3, 4, (5.0f64 / 3.0).sqrt())
                .h(1, 2, 4, 1.0),
            "control: the metric equation holds but the torsion equation cannot",
        ),
        "heis3xRk" => {
            let k = param(&p, "k", 1.0) as usize;
            let n = 3 + k;
            let mut dd = vec![1.0, 1.0, 2.0];
            dd.extend(std::iter::repeat(2.0).take(k));
            soliton(
                AlgebraSpec::new("heis3xRk", n)
                    .mu(1, 2, 3, 1.0)
                    .h(1, 2, 3, 1.0)
                    .tag("k", k),
                -2.0,
                Some(diag(&dd)),
                SolitonClass::Expanding,
            )
        }
        "so3" => soliton(
            AlgebraSpec::new("so3", 3)
                .mu(1, 2, 3, 1.0)
                .mu(2, 3, 1, 1.0)
                .mu(1, 3, 2, -1.0),
            0.5,
            Some(diag(&[0.0, 0.0, 0.0])),
            SolitonClass::Shrinking,
        ),
        "sol3" => plain(
            AlgebraSpec::new("sol3", 3)
                .mu(1, 3, 1, -1.0)
                .mu(2, 3, 2, 1.0)
                .h(1, 2, 3, 1.0),
        ),
        "aff1" => soliton(
            AlgebraSpec::new("aff1", 2).mu(1, 2, 2, 1.0),
            -1.0,
            Some(diag(&[0.0, 0.0])),
            SolitonClass::Expanding,
        ),
        other => return Err(Error::UnknownEntry(other.to_string())),
    };
    if e.spec.dim == 0 || e.spec.dim > MAX_DIM {
        return Err(Error::UnknownEntry(format!(
            "{query}: dimension {} outside 1..={MAX_DIM}",
            e.spec.dim
        )));
    }
    Ok(e)
}

pub const ENTRY_NAMES: &[&str] = &[
    "abelian",
    "abelian-h",
    "n3",
    "n3-soliton",
    "n3-control",
    "n3r",
    "n3r-soliton-1",
    "n3r-circle",
    "n3r-classic",
    "n3r-harmonic-start",
    "n4",
    "n4-soliton-1",
    "n4-soliton-2",
    "n4-lambda3-control",
    "heis3xRk",
    "so3",
    "sol3",
    "aff1",
];

/// All entries at their default parameters.
pub fn catalog() -> Vec<CatalogEntry> {
    ENTRY_NAMES
        .iter()
        .map(|n| entry(n).expect("built-in entry"))
        .collect()
}

/// Fixtures of the dimension <= 4 nilsoliton classification, the 8-point
/// circle sweep, and the non-soliton controls.
pub fn classification_fixtures() -> Vec<CatalogEntry> {
    let mut v = vec![
        entry("n3-soliton").expect("built-in"),
        entry("n3r-soliton-1").expect("built-in"),
    ];
    for m in 0..8 {
        let theta = 2.0 * PI * m as f64 / 8.0;
        let mut e = n3r_circle(theta);
        e.spec.name = format!("n3r-circle[{m}/8]");
        v.push(e);
    }
    v.push(entry("n4-soliton-1").expect("built-in"));
    v.push(entry("n4-soliton-2").expect("built-in"));
    v.push(entry("n3-control").expect("built-in"));
    v.push(entry("n4-lambda3-control").expect("built-in"));
    v
}
