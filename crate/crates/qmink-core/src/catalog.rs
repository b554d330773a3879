//! The seven deformation families: parameter validation and the raw
//! E, E', Q', X data each quantum Lorentz group is built from.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::QminkError;
use crate::matrixcore::{c, cr, flip, inverse, CMat, CVec, I};

fn default_sign() -> i8 {
    1
}

/// One of the seven deformation families plus its real parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseSpec {
    #[serde(rename = "case")]
    pub case_id: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default = "default_sign")]
    pub s: i8,
}

impl CaseSpec {
    pub fn new(case_id: u8) -> Self {
        CaseSpec {
            case_id,
            t: None,
            c: None,
            r: None,
            s: 1,
        }
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = Some(c);
        self
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = Some(r);
        self
    }

    pub fn with_s(mut self, s: i8) -> Self {
        self.s = s;
        self
    }

    pub fn t(&self) -> f64 {
        self.t.unwrap_or(1.0)
    }

    pub fn c(&self) -> f64 {
        self.c.unwrap_or(1.0)
    }

    pub fn r(&self) -> f64 {
        self.r.unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<(), QminkError> {
        let bad = |m: &str| Err(QminkError::InvalidParameter(m.to_string()));
        if self.s != 1 && self.s != -1 {
            return bad("s must be +1 or -1");
        }
        match self.case_id {
            1 | 5 => {
                let t = self.t.ok_or_else(|| {
                    QminkError::InvalidParameter(format!("case {} needs t", self.case_id))
                })?;
                if !(t > 0.0 && t <= 1.0) {
                    return bad("cases 1 and 5 need 0 < t <= 1");
                }
            }
            7 => {
                let t = self
                    .t
                    .ok_or_else(|| QminkError::InvalidParameter("case 7 needs t".into()))?;
                if !(t > 0.0 && t < 1.0) {
                    return bad("case 7 needs 0 < t < 1");
                }
            }
            2 | 4 | 6 => {
                let c = self.c.ok_or_else(|| {
                    QminkError::InvalidParameter(format!("case {} needs c", self.case_id))
                })?;
                if c == 0.0 || !c.is_finite() {
                    return bad("c must be real nonzero");
                }
            }
            3 => {
                let c = self
                    .c
                    .ok_or_else(|| QminkError::InvalidParameter("case 3 needs c".into()))?;
                if c == 0.0 || !c.is_finite() {
                    return bad("c must be real nonzero");
                }
                let r = self
                    .r
                    .ok_or_else(|| QminkError::InvalidParameter("case 3 needs r".into()))?;
                if !(r >= 0.0) {
                    return bad("case 3 needs r >= 0");
                }
            }
            _ => return bad("case must be one of 1..7"),
        }
        Ok(())
    }

    /// q = 1 for cases 1-4, q = -1 for cases 5-7.
    pub fn q(&self) -> f64 {
        if self.case_id <= 4 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Raw tensors of a quantum Lorentz group case.
#[derive(Debug, Clone)]
pub struct LorentzData {
    pub e4: CVec,
    pub eprime4: CVec,
    pub e2: CMat,
    pub x: CMat,
    pub x_inv: CMat,
    pub qprime: CMat,
    pub q: f64,
    pub qhalf: Complex64,
    pub s: f64,
}

/// sigma_0 = 1, sigma_1, sigma_2, sigma_3.
pub fn pauli() -> [CMat; 4] {
    [
        CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(1.0)]),
        CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]),
        CMat::from_row_slice(2, 2, &[cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)]),
        CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)]),
    ]
}

fn e_vectors(case_id: u8, cpar: f64) -> (CVec, CVec) {
    // tensor index (A,B) -> 2A+B, basis e_1,e_2 -> 0,1
    match case_id {
        1 | 2 => (
            CVec::from_vec(vec![cr(0.0), cr(1.0), cr(-1.0), cr(0.0)]),
            CVec::from_vec(vec![cr(0.0), cr(-1.0), cr(1.0), cr(0.0)]),
        ),
        3 | 4 => (
            CVec::from_vec(vec![cr(cpar), cr(1.0), cr(-1.0), cr(0.0)]),
            CVec::from_vec(vec![cr(0.0), cr(-1.0), cr(1.0), cr(cpar)]),
        ),
        5 | 6 | 7 => (
            CVec::from_vec(vec![cr(0.0), cr(1.0), cr(1.0), cr(0.0)]),
            CVec::from_vec(vec![cr(0.0), cr(1.0), cr(1.0), cr(0.0)]),
        ),
        _ => unreachable!(),
    }
}

fn qprime_matrix(spec: &CaseSpec) -> CMat {
    let (t, cpar, r) = (spec.t(), spec.c(), spec.r());
    match spec.case_id {
        1 => CMat::from_diagonal(&CVec::from_vec(vec![
            cr(1.0 / t),
            cr(t),
            cr(t),
            cr(1.0 / t),
        ])),
        2 => {
            let mut m = CMat::identity(4, 4);
            m[(0, 3)] = cr(cpar * cpar);
            m
        }
        3 => {
            let mut m = CMat::identity(4, 4);
            m[(0, 3)] = cr(r * cpar * cpar);
            m
        }
        4 => {
            let mut m = CMat::identity(4, 4);
            m[(0, 1)] = cr(cpar);
            m[(0, 2)] = cr(cpar);
            m[(1, 3)] = cr(-cpar);
            m[(2, 3)] = cr(-cpar);
            m
        }
        5 => CMat::from_diagonal(&CVec::from_vec(vec![
            I * cr(1.0 / t),
            I * cr(-t),
            I * cr(-t),
            I * cr(1.0 / t),
        ])),
        6 => {
            let mut m = CMat::zeros(4, 4);
            m[(0, 0)] = I;
            m[(1, 1)] = -I;
            m[(2, 2)] = -I;
            m[(3, 3)] = I;
            m[(0, 3)] = I * cr(cpar * cpar);
            m
        }
        7 => {
            let r7 = (t + 1.0 / t) / 2.0;
            let vs = (t - 1.0 / t) / 2.0;
            let mut m = CMat::zeros(4, 4);
            m[(0, 0)] = I * cr(r7);
            m[(1, 1)] = I * cr(-r7);
            m[(2, 2)] = I * cr(-r7);
            m[(3, 3)] = I * cr(r7);
            m[(0, 3)] = I * cr(vs);
            m[(1, 2)] = I * cr(vs);
            m[(2, 1)] = I * cr(vs);
            m[(3, 0)] = I * cr(vs);
            m
        }
        _ => unreachable!(),
    }
}

pub fn build_lorentz_data(spec: &CaseSpec) -> Result<LorentzData, QminkError> {
    spec.validate()?;
    let (e4, eprime4) = e_vectors(spec.case_id, spec.c());
    let qprime = qprime_matrix(spec);
    let x = flip(2, 2) * &qprime;
    let x_inv = inverse(&x)?;
    let e2 = CMat::from_fn(2, 2, |a, b| e4[2 * a + b]);

    // E' read as a 2x2 matrix must be the inverse of E
    let eprime2 = CMat::from_fn(2, 2, |a, b| eprime4[2 * a + b]);
    let e2_inv = inverse(&e2)?;
    if crate::matrixcore::max_diff(&eprime2, &e2_inv) > 1e-12 {
        return Err(QminkError::StructureInconsistent(
            "E' is not the inverse of E".into(),
        ));
    }

    let q = spec.q();
    let qhalf = if q > 0.0 { cr(1.0) } else { I };
    Ok(LorentzData {
        e4,
        eprime4,
        e2,
        x,
        x_inv,
        qprime,
        q,
        qhalf,
        s: spec.s as f64,
    })
}
