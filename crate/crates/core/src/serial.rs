//! Serialization of complex data: numbers as [re, im], matrices as row-major nested arrays.

use serde::ser::{SerializeSeq, Serializer};

use crate::{Mat, C64};

pub fn c64_pair(z: &C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn mat_rows(m: &Mat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| c64_pair(&m[(i, j)])).collect()).collect()
}

pub fn ser_c64<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(c64_pair(z))
}

pub fn ser_vec_c64<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&c64_pair(z))?;
    }
    seq.end()
}

pub fn ser_mat<S: Serializer>(m: &Mat, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(mat_rows(m))
}

pub fn ser_opt_mat<S: Serializer>(m: &Option<Mat>, s: S) -> Result<S::Ok, S::Error> {
    match m {
        Some(m) => s.serialize_some(&mat_rows(m)),
        None => s.serialize_none(),
    }
}

/// Parse "a+bi", "a-bi", "bi", "a", "i", "-i" (also accepts j for the unit).
pub fn parse_c64(text: &str) -> Option<C64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return None;
    }
    let t = t.replace('j', "i");
    if !t.ends_with('i') {
        return t.parse::<f64>().ok().map(|re| C64::new(re, 0.0));
    }
    let body = &t[..t.len() - 1];
    // split at the last sign that is not an exponent sign or leading
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && bytes[k - 1] != b'e' && bytes[k - 1] != b'E' {
            split = Some(k);
            break;
        }
    }
    let im_of = |s: &str| -> Option<f64> {
        match s {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => s.parse::<f64>().ok(),
        }
    };
    match split {
        Some(k) => Some(C64::new(body[..k].parse::<f64>().ok()?, im_of(&body[k..])?)),
        None => Some(C64::new(0.0, im_of(body)?)),
    }
}
