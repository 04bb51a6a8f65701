//! JSON file formats.

/// Serde adapter: complex scalar as `[re, im]`.
pub mod c64_serde {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

/// Serde adapter: complex matrix as row-major nested arrays of `[re, im]`.
pub mod cmatrix_serde {
    use crate::linalg::CMatrix;
    use num_complex::Complex64;
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(D::Error::custom("ragged matrix rows"));
        }
        Ok(CMatrix::from_fn(r, c, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
    }
}

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::quat::{QuatMatrix, Quaternion};
use crate::realization::{AnyRealization, QuatRealization, Realization};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldTag {
    Complex,
    Quaternion,
}

/// Matrix as row-major nested arrays; each entry is `[re, im]` or `[w, x, y, z]`.
pub type Entries = Vec<Vec<Vec<f64>>>;

/// On-disk realization. `poly[k]` multiplies `z^(k+1)` and is omitted when empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealizationFile {
    pub field: FieldTag,
    pub n_out: usize,
    pub n_in: usize,
    pub state_dim: usize,
    #[serde(rename = "A")]
    pub a: Entries,
    #[serde(rename = "B")]
    pub b: Entries,
    #[serde(rename = "C")]
    pub c: Entries,
    #[serde(rename = "D")]
    pub d: Entries,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub poly: Vec<Entries>,
}

fn complex_entries(m: &CMatrix) -> Entries {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| vec![m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn quat_entries(m: &QuatMatrix) -> Entries {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| { let q = m[(i, j)]; vec![q.w, q.x, q.y, q.z] }).collect())
        .collect()
}

fn check_entries(name: &str, e: &Entries, rows: usize, cols: usize, width: usize) -> Result<()> {
    // A matrix with zero columns may be written either as [] or as rows of [].
    let rows_ok = e.len() == rows || (cols == 0 && e.is_empty());
    if !rows_ok || e.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch(format!("{name} should be {rows}x{cols}")));
    }
    if e.iter().flatten().any(|x| x.len() != width) {
        return Err(Error::InvalidInput(format!("{name}: every entry needs {width} numbers")));
    }
    if e.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("{name} has non-finite entries")));
    }
    Ok(())
}

fn to_complex(e: &Entries, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |i, j| Complex64::new(e[i][j][0], e[i][j][1]))
}

fn to_quat(e: &Entries, rows: usize, cols: usize) -> QuatMatrix {
    QuatMatrix::from_fn(rows, cols, |i, j| {
        let v = &e[i][j];
        Quaternion::new(v[0], v[1], v[2], v[3])
    })
}

impl RealizationFile {
    pub fn from_complex(r: &Realization) -> Self {
        RealizationFile {
            field: FieldTag::Complex,
            n_out: r.n_out(),
            n_in: r.n_in(),
            state_dim: r.state_dim(),
            a: complex_entries(r.a()),
            b: complex_entries(r.b()),
            c: complex_entries(r.c()),
            d: complex_entries(r.d()),
            poly: r.poly().iter().map(complex_entries).collect(),
        }
    }

    pub fn from_quat(r: &QuatRealization) -> Self {
        RealizationFile {
            field: FieldTag::Quaternion,
            n_out: r.n_out(),
            n_in: r.n_in(),
            state_dim: r.state_dim(),
            a: quat_entries(r.a()),
            b: quat_entries(r.b()),
            c: quat_entries(r.c()),
            d: quat_entries(r.d()),
            poly: r.poly().iter().map(quat_entries).collect(),
        }
    }

    pub fn from_any(r: &AnyRealization) -> Self {
        match r {
            AnyRealization::Complex(r) => Self::from_complex(r),
            AnyRealization::Quaternion(r) => Self::from_quat(r),
        }
    }

    pub fn to_realization(&self) -> Result<AnyRealization> {
        let (n, p, m) = (self.state_dim, self.n_out, self.n_in);
        let width = match self.field {
            FieldTag::Complex => 2,
            FieldTag::Quaternion => 4,
        };
        check_entries("A", &self.a, n, n, width)?;
        check_entries("B", &self.b, n, m, width)?;
        check_entries("C", &self.c, p, n, width)?;
        check_entries("D", &self.d, p, m, width)?;
        for (k, e) in self.poly.iter().enumerate() {
            check_entries(&format!("poly[{k}]"), e, p, m, width)?;
        }
        Ok(match self.field {
            FieldTag::Complex => AnyRealization::Complex(Realization::with_poly(
                to_complex(&self.a, n, n),
                to_complex(&self.b, n, m),
                to_complex(&self.c, p, n),
                to_complex(&self.d, p, m),
                self.poly.iter().map(|e| to_complex(e, p, m)).collect(),
            )?),
            FieldTag::Quaternion => AnyRealization::Quaternion(QuatRealization::with_poly(
                to_quat(&self.a, n, n),
                to_quat(&self.b, n, m),
                to_quat(&self.c, p, n),
                to_quat(&self.d, p, m),
                self.poly.iter().map(|e| to_quat(e, p, m)).collect(),
            )?),
        })
    }
}

/// One top-level key per line, each value compact.
pub fn realization_to_json(r: &AnyRealization) -> String {
    let value = serde_json::to_value(RealizationFile::from_any(r)).expect("plain data serializes");
    let serde_json::Value::Object(map) = value else { unreachable!("a struct serializes to an object") };
    let lines: Vec<String> = map.iter().map(|(k, v)| format!("  {}: {}", serde_json::Value::from(k.as_str()), v)).collect();
    format!("{{\n{}\n}}\n", lines.join(",\n"))
}

pub fn realization_from_json(text: &str) -> Result<AnyRealization> {
    let file: RealizationFile = serde_json::from_str(text)?;
    file.to_realization()
}

pub fn read_realization(path: &std::path::Path) -> Result<AnyRealization> {
    realization_from_json(&std::fs::read_to_string(path)?)
}

impl Serialize for Realization {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RealizationFile::from_complex(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Realization {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match RealizationFile::deserialize(d)?.to_realization().map_err(D::Error::custom)? {
            AnyRealization::Complex(r) => Ok(r),
            AnyRealization::Quaternion(_) => Err(D::Error::custom("expected a complex realization")),
        }
    }
}

impl Serialize for QuatRealization {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RealizationFile::from_quat(self).serialize(s)
    }
}

/// Parses `a+bi` or `a+bi+cj+dk` (any subset of terms, any order, spaces
/// allowed); a bare unit such as `-k` has coefficient one.
pub fn parse_quaternion(text: &str) -> Result<Quaternion> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::InvalidInput("empty point".into()));
    }
    let bad = || Error::InvalidInput(format!("cannot parse point {text:?}"));
    let bytes = s.as_bytes();
    let mut terms = Vec::new();
    let mut start = 0;
    for i in 1..bytes.len() {
        let sign = bytes[i] == b'+' || bytes[i] == b'-';
        if sign && !matches!(bytes[i - 1], b'e' | b'E') {
            terms.push(&s[start..i]);
            start = i;
        }
    }
    terms.push(&s[start..]);
    let mut q = [0.0f64; 4];
    let mut seen = [false; 4];
    for t in terms {
        let (body, slot) = match t.chars().last() {
            Some('i') => (&t[..t.len() - 1], 1),
            Some('j') => (&t[..t.len() - 1], 2),
            Some('k') => (&t[..t.len() - 1], 3),
            _ => (t, 0),
        };
        let value = match body {
            "" | "+" => 1.0,
            "-" => -1.0,
            _ if slot > 0 && body.ends_with('*') => body[..body.len() - 1].parse::<f64>().map_err(|_| bad())?,
            _ => body.parse::<f64>().map_err(|_| bad())?,
        };
        if seen[slot] || !value.is_finite() {
            return Err(bad());
        }
        seen[slot] = true;
        q[slot] = value;
    }
    Ok(Quaternion::new(q[0], q[1], q[2], q[3]))
}

pub fn parse_complex(text: &str) -> Result<Complex64> {
    let q = parse_quaternion(text)?;
    if q.y != 0.0 || q.z != 0.0 {
        return Err(Error::InvalidInput(format!("{text:?} is not a complex number")));
    }
    Ok(Complex64::new(q.w, q.x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real;

    #[test]
    fn parses_points() {
        assert_eq!(parse_quaternion("1").unwrap(), Quaternion::real(1.0));
        assert_eq!(parse_quaternion("k").unwrap(), Quaternion::K);
        assert_eq!(parse_quaternion(" 1 - 2i + 0.5j - k ").unwrap(), Quaternion::new(1.0, -2.0, 0.5, -1.0));
        assert_eq!(parse_complex("-1.5e-3+2e+1i").unwrap(), Complex64::new(-1.5e-3, 20.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert!(parse_complex("1+j").is_err());
        assert!(parse_quaternion("1+1").is_err());
        assert!(parse_quaternion("abc").is_err());
        assert!(parse_quaternion("").is_err());
    }

    #[test]
    fn realization_round_trip() {
        let r = Realization::new(
            from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            from_real(2, 1, &[0.0, -1.0]),
            from_real(1, 2, &[1.0, 0.0]),
            from_real(1, 1, &[0.0]),
        )
        .unwrap();
        let any = AnyRealization::Complex(r);
        let text = realization_to_json(&any);
        assert_eq!(realization_from_json(&text).unwrap(), any);
        assert!(text.contains("\"field\": \"complex\""));
        let c = AnyRealization::Complex(Realization::constant(from_real(2, 2, &[1.0, 0.0, 0.0, 1.0])));
        assert_eq!(realization_from_json(&realization_to_json(&c)).unwrap(), c);
    }

    #[test]
    fn rejects_bad_shapes() {
        let text = r#"{"field":"complex","n_out":1,"n_in":1,"state_dim":1,"A":[[[0,0]]],"B":[[[1,0]]],"C":[[[1,0],[2,0]]],"D":[[[0,0]]]}"#;
        assert!(matches!(realization_from_json(text), Err(Error::DimensionMismatch(_))));
        let text = r#"{"field":"complex","n_out":1,"n_in":1,"state_dim":0,"A":[],"B":[],"C":[[]],"D":[[[0,0,1]]]}"#;
        assert!(matches!(realization_from_json(text), Err(Error::InvalidInput(_))));
    }
}
