//! JSON wire formats. Complex numbers are [re, im] pairs throughout.
//!
//! ```text
//!   CyclicFunction   {"N": n, "values": [[re, im], ...]}        (exactly N pairs)
//!   GridFunction     {"N": n, "M": m, "values": [[[re,im],..],..]}  (row-major)
//!   OneForm          {"N": n, "coeff_p": [...], "coeff_pt": [...]}
//!   Tensor2          {"N": n, "coeffs": {"pp": .., "ppt": .., "ptp": .., "ptpt": ..}}
//!   Metric           {"N": n, "G_p": [...], "G_pt": [...]}
//!   Connection       {"N": n, "A_p": .., "A_pt": .., "B_p": .., "B_pt": ..}
//!   TorusMetric      {"N": n, "M": m, "G_p": .., "G_pt": .., "G_s": .., "G_st": ..}
//!   TorusConnection  {"N", "M", "A_p".."A_st", "B_p".."B_st", "W_p".."W_st",
//!                     "C_ps", "C_pst", "C_pts", "C_ptst",
//!                     "C_sp", "C_spt", "C_stp", "C_stpt"}
//!   FamilyParams     {"x_kind": {"constant": [re,im]}
//!                               | {"nonconstant": {"l": .., "phi": [re,im]}},
//!                     "case": "Ia".."IInonconst",
//!                     "kappa_p": [re,im]?, "kappa_pt": [re,im]?}
//! ```
//!
//! All invariants (lengths, moduli, nonvanishing metrics, the N > 4
//! restriction on calculus-level objects) are re-validated on the way in,
//! so decoding untrusted input can only fail with a typed error.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::calculus::{Gen, OneForm, Tensor2};
use crate::cyclic::{CyclicFunction, GridFunction};
use crate::metric::Metric;
use crate::connection::Connection;
use crate::solver::{CaseTag, FamilyParams, XKind};
use crate::torus::{TGen, TorusConnection, TorusMetric, PERP_PAIRS};

fn pairs(values: &[Complex64]) -> Vec<[f64; 2]> {
    values.iter().map(|z| [z.re, z.im]).collect()
}

fn unpairs(values: Vec<[f64; 2]>) -> Vec<Complex64> {
    values
        .into_iter()
        .map(|[re, im]| Complex64::new(re, im))
        .collect()
}

fn check_finite<E: serde::de::Error>(values: &[Complex64]) -> Result<(), E> {
    match values
        .iter()
        .position(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        Some(k) => Err(E::custom(format!("non-finite value at index {k}"))),
        None => Ok(()),
    }
}

fn unpairs_checked<E: serde::de::Error>(values: Vec<[f64; 2]>) -> Result<Vec<Complex64>, E> {
    let out = unpairs(values);
    check_finite(&out)?;
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct CyclicJson {
    #[serde(rename = "N")]
    n: usize,
    values: Vec<[f64; 2]>,
}

impl Serialize for CyclicFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        CyclicJson {
            n: self.modulus(),
            values: pairs(self.values()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CyclicFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = CyclicJson::deserialize(deserializer)?;
        if raw.values.len() != raw.n {
            return Err(D::Error::custom(format!(
                "expected exactly {} value pairs, got {}",
                raw.n,
                raw.values.len()
            )));
        }
        CyclicFunction::new(unpairs_checked(raw.values)?).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct GridJson {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "M")]
    m: usize,
    values: Vec<Vec<[f64; 2]>>,
}

impl Serialize for GridFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let (n, m) = self.moduli();
        GridJson {
            n,
            m,
            values: (0..n)
                .map(|i| pairs(&self.values()[i * m..(i + 1) * m]))
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GridFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = GridJson::deserialize(deserializer)?;
        if raw.values.len() != raw.n || raw.values.iter().any(|row| row.len() != raw.m) {
            return Err(D::Error::custom(format!(
                "expected {} rows of {} pairs",
                raw.n, raw.m
            )));
        }
        let flat: Vec<Complex64> = raw.values.into_iter().flat_map(unpairs).collect();
        check_finite::<D::Error>(&flat)?;
        GridFunction::new(raw.n, raw.m, flat).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct OneFormJson {
    #[serde(rename = "N")]
    n: usize,
    coeff_p: Vec<[f64; 2]>,
    coeff_pt: Vec<[f64; 2]>,
}

impl Serialize for OneForm {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        OneFormJson {
            n: self.modulus(),
            coeff_p: pairs(self.coeff_p().values()),
            coeff_pt: pairs(self.coeff_pt().values()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for OneForm {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = OneFormJson::deserialize(deserializer)?;
        if raw.coeff_p.len() != raw.n || raw.coeff_pt.len() != raw.n {
            return Err(D::Error::custom("coefficient length must equal N"));
        }
        let p = CyclicFunction::new(unpairs_checked(raw.coeff_p)?).map_err(D::Error::custom)?;
        let pt = CyclicFunction::new(unpairs_checked(raw.coeff_pt)?).map_err(D::Error::custom)?;
        OneForm::new(p, pt).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct Tensor2Coeffs {
    pp: Vec<[f64; 2]>,
    ppt: Vec<[f64; 2]>,
    ptp: Vec<[f64; 2]>,
    ptpt: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct Tensor2Json {
    #[serde(rename = "N")]
    n: usize,
    coeffs: Tensor2Coeffs,
}

impl Serialize for Tensor2 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        Tensor2Json {
            n: self.modulus(),
            coeffs: Tensor2Coeffs {
                pp: pairs(self.slot(Gen::P, Gen::P).values()),
                ppt: pairs(self.slot(Gen::P, Gen::Pt).values()),
                ptp: pairs(self.slot(Gen::Pt, Gen::P).values()),
                ptpt: pairs(self.slot(Gen::Pt, Gen::Pt).values()),
            },
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Tensor2 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Tensor2Json::deserialize(deserializer)?;
        let slot = |v: Vec<[f64; 2]>| -> Result<CyclicFunction, D::Error> {
            if v.len() != raw.n {
                return Err(D::Error::custom("coefficient length must equal N"));
            }
            CyclicFunction::new(unpairs_checked(v)?).map_err(D::Error::custom)
        };
        Tensor2::new([
            [slot(raw.coeffs.pp)?, slot(raw.coeffs.ppt)?],
            [slot(raw.coeffs.ptp)?, slot(raw.coeffs.ptpt)?],
        ])
        .map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct MetricJson {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "G_p")]
    g_p: Vec<[f64; 2]>,
    #[serde(rename = "G_pt")]
    g_pt: Vec<[f64; 2]>,
}

impl Serialize for Metric {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MetricJson {
            n: self.modulus(),
            g_p: pairs(self.g_p().values()),
            g_pt: pairs(self.g_pt().values()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Metric {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = MetricJson::deserialize(deserializer)?;
        if raw.g_p.len() != raw.n || raw.g_pt.len() != raw.n {
            return Err(D::Error::custom("metric coefficient length must equal N"));
        }
        let g_p = CyclicFunction::new(unpairs_checked(raw.g_p)?).map_err(D::Error::custom)?;
        let g_pt = CyclicFunction::new(unpairs_checked(raw.g_pt)?).map_err(D::Error::custom)?;
        Metric::new(g_p, g_pt).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct ConnectionJson {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "A_p")]
    a_p: Vec<[f64; 2]>,
    #[serde(rename = "A_pt")]
    a_pt: Vec<[f64; 2]>,
    #[serde(rename = "B_p")]
    b_p: Vec<[f64; 2]>,
    #[serde(rename = "B_pt")]
    b_pt: Vec<[f64; 2]>,
}

impl Serialize for Connection {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ConnectionJson {
            n: self.modulus(),
            a_p: pairs(self.a(Gen::P).values()),
            a_pt: pairs(self.a(Gen::Pt).values()),
            b_p: pairs(self.b(Gen::P).values()),
            b_pt: pairs(self.b(Gen::Pt).values()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Connection {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = ConnectionJson::deserialize(deserializer)?;
        let take = |v: Vec<[f64; 2]>| -> Result<CyclicFunction, D::Error> {
            if v.len() != raw.n {
                return Err(D::Error::custom("coefficient length must equal N"));
            }
            CyclicFunction::new(unpairs_checked(v)?).map_err(D::Error::custom)
        };
        Connection::new(take(raw.a_p)?, take(raw.a_pt)?, take(raw.b_p)?, take(raw.b_pt)?)
            .map_err(D::Error::custom)
    }
}

type GridRows = Vec<Vec<[f64; 2]>>;

fn grid_rows(f: &GridFunction) -> GridRows {
    let (n, m) = f.moduli();
    (0..n)
        .map(|i| pairs(&f.values()[i * m..(i + 1) * m]))
        .collect()
}

fn grid_from_rows<E: serde::de::Error>(n: usize, m: usize, rows: GridRows) -> Result<GridFunction, E> {
    if rows.len() != n || rows.iter().any(|row| row.len() != m) {
        return Err(E::custom(format!("expected {n} rows of {m} pairs")));
    }
    let flat: Vec<Complex64> = rows.into_iter().flat_map(unpairs).collect();
    check_finite::<E>(&flat)?;
    GridFunction::new(n, m, flat).map_err(E::custom)
}

#[derive(Serialize, Deserialize)]
struct TorusMetricJson {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "G_p")]
    g_p: GridRows,
    #[serde(rename = "G_pt")]
    g_pt: GridRows,
    #[serde(rename = "G_s")]
    g_s: GridRows,
    #[serde(rename = "G_st")]
    g_st: GridRows,
}

impl Serialize for TorusMetric {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let (n, m) = self.moduli();
        TorusMetricJson {
            n,
            m,
            g_p: grid_rows(self.g(TGen::P)),
            g_pt: grid_rows(self.g(TGen::Pt)),
            g_s: grid_rows(self.g(TGen::S)),
            g_st: grid_rows(self.g(TGen::St)),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TorusMetric {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = TorusMetricJson::deserialize(deserializer)?;
        TorusMetric::new(
            grid_from_rows(raw.n, raw.m, raw.g_p)?,
            grid_from_rows(raw.n, raw.m, raw.g_pt)?,
            grid_from_rows(raw.n, raw.m, raw.g_s)?,
            grid_from_rows(raw.n, raw.m, raw.g_st)?,
        )
        .map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct TorusConnectionJson {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "A_p")]
    a_p: GridRows,
    #[serde(rename = "A_pt")]
    a_pt: GridRows,
    #[serde(rename = "A_s")]
    a_s: GridRows,
    #[serde(rename = "A_st")]
    a_st: GridRows,
    #[serde(rename = "B_p")]
    b_p: GridRows,
    #[serde(rename = "B_pt")]
    b_pt: GridRows,
    #[serde(rename = "B_s")]
    b_s: GridRows,
    #[serde(rename = "B_st")]
    b_st: GridRows,
    #[serde(rename = "W_p")]
    w_p: GridRows,
    #[serde(rename = "W_pt")]
    w_pt: GridRows,
    #[serde(rename = "W_s")]
    w_s: GridRows,
    #[serde(rename = "W_st")]
    w_st: GridRows,
    #[serde(rename = "C_ps")]
    c_ps: GridRows,
    #[serde(rename = "C_pst")]
    c_pst: GridRows,
    #[serde(rename = "C_pts")]
    c_pts: GridRows,
    #[serde(rename = "C_ptst")]
    c_ptst: GridRows,
    #[serde(rename = "C_sp")]
    c_sp: GridRows,
    #[serde(rename = "C_spt")]
    c_spt: GridRows,
    #[serde(rename = "C_stp")]
    c_stp: GridRows,
    #[serde(rename = "C_stpt")]
    c_stpt: GridRows,
}

impl Serialize for TorusConnection {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let (n, m) = self.moduli();
        TorusConnectionJson {
            n,
            m,
            a_p: grid_rows(self.a(TGen::P)),
            a_pt: grid_rows(self.a(TGen::Pt)),
            a_s: grid_rows(self.a(TGen::S)),
            a_st: grid_rows(self.a(TGen::St)),
            b_p: grid_rows(self.b(TGen::P)),
            b_pt: grid_rows(self.b(TGen::Pt)),
            b_s: grid_rows(self.b(TGen::S)),
            b_st: grid_rows(self.b(TGen::St)),
            w_p: grid_rows(self.w(TGen::P)),
            w_pt: grid_rows(self.w(TGen::Pt)),
            w_s: grid_rows(self.w(TGen::S)),
            w_st: grid_rows(self.w(TGen::St)),
            c_ps: grid_rows(self.c(TGen::P, TGen::S)),
            c_pst: grid_rows(self.c(TGen::P, TGen::St)),
            c_pts: grid_rows(self.c(TGen::Pt, TGen::S)),
            c_ptst: grid_rows(self.c(TGen::Pt, TGen::St)),
            c_sp: grid_rows(self.c(TGen::S, TGen::P)),
            c_spt: grid_rows(self.c(TGen::S, TGen::Pt)),
            c_stp: grid_rows(self.c(TGen::St, TGen::P)),
            c_stpt: grid_rows(self.c(TGen::St, TGen::Pt)),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TorusConnection {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = TorusConnectionJson::deserialize(deserializer)?;
        let (n, m) = (raw.n, raw.m);
        let g = |rows: GridRows| grid_from_rows::<D::Error>(n, m, rows);
        let c_in_order = [
            g(raw.c_ps)?,
            g(raw.c_pst)?,
            g(raw.c_pts)?,
            g(raw.c_ptst)?,
            g(raw.c_sp)?,
            g(raw.c_spt)?,
            g(raw.c_stp)?,
            g(raw.c_stpt)?,
        ];
        debug_assert_eq!(PERP_PAIRS[0], (TGen::P, TGen::S));
        TorusConnection::new(
            [g(raw.a_p)?, g(raw.a_pt)?, g(raw.a_s)?, g(raw.a_st)?],
            [g(raw.b_p)?, g(raw.b_pt)?, g(raw.b_s)?, g(raw.b_st)?],
            [g(raw.w_p)?, g(raw.w_pt)?, g(raw.w_s)?, g(raw.w_st)?],
            c_in_order,
        )
        .map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum XKindJson {
    Constant([f64; 2]),
    Nonconstant { l: usize, phi: [f64; 2] },
}

#[derive(Serialize, Deserialize)]
struct FamilyParamsJson {
    x_kind: XKindJson,
    case: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa_p: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa_pt: Option<[f64; 2]>,
}

impl Serialize for FamilyParams {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        FamilyParamsJson {
            x_kind: match self.x_kind {
                XKind::Constant { gamma } => XKindJson::Constant([gamma.re, gamma.im]),
                XKind::Nonconstant { l, phi } => XKindJson::Nonconstant {
                    l,
                    phi: [phi.re, phi.im],
                },
            },
            case: self.case.label().to_string(),
            kappa_p: self.kappa_p.map(|k| [k.re, k.im]),
            kappa_pt: self.kappa_pt.map(|k| [k.re, k.im]),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FamilyParams {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = FamilyParamsJson::deserialize(deserializer)?;
        let case = match raw.case.as_str() {
            "Ia" => CaseTag::Ia,
            "Ib" => CaseTag::Ib,
            "Ic" => CaseTag::Ic,
            "IIzero" => CaseTag::IIZero,
            "IIa" => CaseTag::IIA,
            "IIb" => CaseTag::IIB,
            "IInonconst" => CaseTag::IINonconst,
            other => return Err(D::Error::custom(format!("unknown case tag {other:?}"))),
        };
        Ok(FamilyParams {
            x_kind: match raw.x_kind {
                XKindJson::Constant([re, im]) => XKind::Constant {
                    gamma: Complex64::new(re, im),
                },
                XKindJson::Nonconstant { l, phi: [re, im] } => XKind::Nonconstant {
                    l,
                    phi: Complex64::new(re, im),
                },
            },
            case,
            kappa_p: raw.kappa_p.map(|[re, im]| Complex64::new(re, im)),
            kappa_pt: raw.kappa_pt.map(|[re, im]| Complex64::new(re, im)),
        })
    }
}
