use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Matrix2;
use num_complex::Complex64;

use super::delay_line::SampledResponse;
use crate::error::{Error, Result};

/// Number pair layout of a Touchstone data row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TouchstoneFormat {
    /// Real / imaginary.
    Ri,
    /// Linear magnitude / angle in degrees.
    Ma,
    /// Magnitude in dB / angle in degrees.
    Db,
}

impl TouchstoneFormat {
    fn pair(self, x: f64, y: f64) -> Complex64 {
        match self {
            TouchstoneFormat::Ri => Complex64::new(x, y),
            TouchstoneFormat::Ma => Complex64::from_polar(x, y.to_radians()),
            TouchstoneFormat::Db => Complex64::from_polar(10f64.powf(x / 20.0), y.to_radians()),
        }
    }
}

struct Options {
    scale: f64,
    format: TouchstoneFormat,
    z0: f64,
}

fn parse_options(tokens: &[&str], err: &dyn Fn(String) -> Error) -> Result<Options> {
    // Touchstone v1 defaults.
    let mut opts = Options { scale: 1e9, format: TouchstoneFormat::Ma, z0: 50.0 };
    let mut i = 0;
    while i < tokens.len() {
        let t = tokens[i].to_ascii_uppercase();
        match t.as_str() {
            "HZ" => opts.scale = 1.0,
            "KHZ" => opts.scale = 1e3,
            "MHZ" => opts.scale = 1e6,
            "GHZ" => opts.scale = 1e9,
            "S" => {}
            "Y" | "Z" | "H" | "G" => return Err(err(format!("parameter type {t} is not supported (only S)"))),
            "RI" => opts.format = TouchstoneFormat::Ri,
            "MA" => opts.format = TouchstoneFormat::Ma,
            "DB" => opts.format = TouchstoneFormat::Db,
            "R" => {
                let v = tokens.get(i + 1).ok_or_else(|| err("missing reference impedance after R".into()))?;
                opts.z0 = v.parse().map_err(|_| err(format!("bad reference impedance `{v}`")))?;
                if !(opts.z0 > 0.0) {
                    return Err(err("reference impedance must be > 0".into()));
                }
                i += 1;
            }
            _ => return Err(err(format!("unknown option `{}`", tokens[i]))),
        }
        i += 1;
    }
    Ok(opts)
}

/// Parse the text of a two-port Touchstone v1 file. `path` only labels errors.
pub fn parse_s2p(text: &str, path: &Path) -> Result<SampledResponse> {
    let err_at = |line: usize, reason: String| Error::Touchstone { path: path.to_path_buf(), line, reason };
    let mut options: Option<Options> = None;
    let mut values: Vec<(usize, f64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let body = raw.split('!').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('#') {
            if options.is_some() {
                return Err(err_at(line_no, "duplicate option line".into()));
            }
            if !values.is_empty() {
                return Err(err_at(line_no, "option line after data".into()));
            }
            let tokens: Vec<&str> = rest.split_whitespace().collect();
            options = Some(parse_options(&tokens, &|r| err_at(line_no, r))?);
            continue;
        }
        for tok in body.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| err_at(line_no, format!("bad number `{tok}`")))?;
            if !v.is_finite() {
                return Err(err_at(line_no, format!("non-finite value `{tok}`")));
            }
            values.push((line_no, v));
        }
    }
    let opts = options.unwrap_or(Options { scale: 1e9, format: TouchstoneFormat::Ma, z0: 50.0 });
    if values.len() % 9 != 0 {
        let line = values.last().map(|v| v.0).unwrap_or(0);
        return Err(err_at(line, format!("{} values is not a whole number of 9-column rows", values.len())));
    }
    let mut freqs = Vec::with_capacity(values.len() / 9);
    let mut s = Vec::with_capacity(values.len() / 9);
    for row in values.chunks(9) {
        let f = row[0].1 * opts.scale;
        if let Some(&prev) = freqs.last() {
            if !(f > prev) {
                return Err(err_at(row[0].0, "frequencies must be strictly ascending".into()));
            }
        }
        let p = |k: usize| opts.format.pair(row[k].1, row[k + 1].1);
        // Column order is S11 S21 S12 S22.
        s.push(Matrix2::new(p(1), p(5), p(3), p(7)));
        freqs.push(f);
    }
    SampledResponse::new(freqs, s, opts.z0).map_err(|e| err_at(0, e.to_string()))
}

pub fn read_s2p(path: impl AsRef<Path>) -> Result<SampledResponse> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_s2p(&text, path)
}

/// Render a response as an RI / Hz Touchstone file. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn format_s2p(response: &SampledResponse) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "! two-port response, frequencies in Hz");
    let _ = writeln!(out, "# Hz S RI R {}", response.z0);
    for (f, s) in response.freqs.iter().zip(&response.s) {
        let cells: [&Complex64; 4] = [&s[(0, 0)], &s[(1, 0)], &s[(0, 1)], &s[(1, 1)]];
        let _ = write!(out, "{f}");
        for c in cells {
            let _ = write!(out, " {} {}", c.re, c.im);
        }
        out.push('\n');
    }
    out
}

pub fn write_s2p(response: &SampledResponse, path: impl AsRef<Path>) -> Result<()> {
    response.validate()?;
    std::fs::write(path, format_s2p(response))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "! measured line\n# MHz S MA R 50\n150 0.1 10 0.6 -90 0.6 -90 0.1 20 ! first\n155 0.05 0 0.63 45\n 0.63 45 0.05 0\n";

    #[test]
    fn parses_ma_rows_and_continuations() {
        let r = parse_s2p(SAMPLE, Path::new("x.s2p")).unwrap();
        assert_eq!(r.freqs, vec![150e6, 155e6]);
        assert_eq!(r.z0, 50.0);
        let s21 = r.s[0][(1, 0)];
        assert!((s21 - Complex64::new(0.0, -0.6)).norm() < 1e-12);
        let s11 = r.s[1][(0, 0)];
        assert!((s11.re - 0.05).abs() < 1e-15);
    }

    #[test]
    fn db_format() {
        let text = "# Hz S DB R 75\n1 -20 0 -3 0 -3 0 -20 0\n2 -20 0 -3 0 -3 0 -20 0\n";
        let r = parse_s2p(text, Path::new("x")).unwrap();
        assert_eq!(r.z0, 75.0);
        assert!((r.s[0][(1, 0)].re - 10f64.powf(-3.0 / 20.0)).abs() < 1e-15);
    }

    #[test]
    fn round_trip_is_exact() {
        let first = parse_s2p(SAMPLE, Path::new("x")).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("line.s2p");
        write_s2p(&first, &p).unwrap();
        let second = read_s2p(&p).unwrap();
        write_s2p(&second, &p).unwrap();
        let third = read_s2p(&p).unwrap();
        assert_eq!(first, second);
        assert_eq!(second, third);
    }

    #[test]
    fn rejects_bad_files() {
        let p = Path::new("bad.s2p");
        assert!(parse_s2p("# Hz S RI R 50\n1 0 0 0 0 0 0 0\n", p).is_err());
        assert!(parse_s2p("# Hz Z RI R 50\n1 0 0 0 0 0 0 0 0\n", p).is_err());
        assert!(parse_s2p("# Hz S RI R 50\n2 0 0 0 0 0 0 0 0\n1 0 0 0 0 0 0 0 0\n", p).is_err());
        assert!(parse_s2p("# Hz S RI R 50\n1 0 0 0 0 0 0 0 0\n2 0 0 0 0 0 0 0 0\n", p).is_ok());
        assert!(parse_s2p("# Hz S RI R 50\n1 0 0 2 0 2 0 0 0\n2 0 0 0 0 0 0 0 0\n", p).is_err());
        match parse_s2p("# Hz S RI R 50\n1 0 0 x 0 0 0 0 0\n", p) {
            Err(Error::Touchstone { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
