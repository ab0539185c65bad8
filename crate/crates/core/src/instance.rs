//! Seeded synthetic instances and the `hrcp 1` text format.
//!
//! The generator draws `p` originating points uniformly in `[-1, 1]^d`, then
//! produces each of the `n` points by picking an originating point uniformly
//! and sampling uniformly from the cube of side `s` centred on it.
//!
//! Instance file:
//!
//! ```text
//! hrcp 1
//! <n> <d>
//! x_1 ... x_d      (n rows)
//! ```
//!
//! Lines starting with `#` are ignored. Coordinates are written with the
//! shortest decimal representation that parses back to the same `f64`.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{HrcpError, Result};
use crate::geometry::Instance;

const INSTANCE_MAGIC: &str = "hrcp 1";
const LABELS_MAGIC: &str = "hrcp-labels 1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    pub d: usize,
    pub n: usize,
    pub p: usize,
    /// Side length of the cube each cluster is drawn from, in `[0, 1]`.
    pub s: f64,
    pub seed: u64,
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n == 0 || self.p == 0 {
            return Err(HrcpError::param("d, n and p must all be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.s) {
            return Err(HrcpError::param(format!("dispersion s = {} outside [0, 1]", self.s)));
        }
        Ok(())
    }
}

/// A generated instance with the originating-point label of every point.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub instance: Instance,
    pub labels: Vec<usize>,
    pub origins: Vec<Vec<f64>>,
}

pub fn generate(params: &GenParams) -> Result<Generated> {
    params.validate()?;
    let GenParams { d, n, p, s, seed } = *params;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let origins: Vec<Vec<f64>> = (0..p).map(|_| (0..d).map(|_| -1.0 + 2.0 * rng.gen::<f64>()).collect()).collect();
    let mut coords = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let c = rng.gen_range(0..p);
        labels.push(c);
        for &o in &origins[c] {
            let offset = s * (rng.gen::<f64>() - 0.5);
            coords.push(o + offset);
        }
    }
    Ok(Generated { instance: Instance::from_flat(d, coords)?, labels, origins })
}

pub fn write_instance<W: Write>(instance: &Instance, mut out: W) -> Result<()> {
    writeln!(out, "{INSTANCE_MAGIC}")?;
    writeln!(out, "{} {}", instance.len(), instance.dim())?;
    let mut line = String::new();
    for x in instance.points() {
        line.clear();
        for (t, v) in x.iter().enumerate() {
            if t > 0 {
                line.push(' ');
            }
            // `Display` for f64 is the shortest round-trip form.
            line.push_str(&v.to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn instance_to_string(instance: &Instance) -> String {
    let mut buf = Vec::new();
    write_instance(instance, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("instance text is ASCII")
}

/// Lines that are neither blank nor `#` comments, with 1-based line numbers.
/// The second value is the number of the last line in the input, used to
/// locate errors caused by premature end of file.
fn content_lines<R: BufRead>(input: R) -> Result<(Vec<(usize, String)>, usize)> {
    let mut out = Vec::new();
    let mut last = 0;
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        last = k + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        out.push((k + 1, trimmed.to_string()));
    }
    Ok((out, last.max(1)))
}

fn parse_usize(line: usize, tok: &str, what: &str) -> Result<usize> {
    tok.parse().map_err(|_| HrcpError::parse(line, format!("invalid {what} `{tok}`")))
}

pub fn read_instance<R: BufRead>(input: R) -> Result<Instance> {
    let (lines, eof_line) = content_lines(input)?;
    let mut it = lines.into_iter();
    match it.next() {
        Some((_, l)) if l == INSTANCE_MAGIC => {}
        Some((k, l)) => return Err(HrcpError::parse(k, format!("expected `{INSTANCE_MAGIC}`, found `{l}`"))),
        None => return Err(HrcpError::parse(1, "empty instance file")),
    }
    let (hline, header) = it.next().ok_or_else(|| HrcpError::parse(eof_line, "missing `<n> <d>` header"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 2 {
        return Err(HrcpError::parse(hline, "header must be `<n> <d>`"));
    }
    let n = parse_usize(hline, toks[0], "point count")?;
    let d = parse_usize(hline, toks[1], "dimension")?;
    if n == 0 || d == 0 {
        return Err(HrcpError::parse(hline, "point count and dimension must be positive"));
    }
    let mut coords = Vec::with_capacity(n * d);
    for row in 0..n {
        let (k, l) =
            it.next().ok_or_else(|| HrcpError::parse(eof_line, format!("expected {n} points, found {row}")))?;
        let before = coords.len();
        for tok in l.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| HrcpError::parse(k, format!("invalid coordinate `{tok}`")))?;
            if !v.is_finite() {
                return Err(HrcpError::parse(k, format!("non-finite coordinate `{tok}`")));
            }
            coords.push(v);
        }
        if coords.len() - before != d {
            return Err(HrcpError::parse(k, format!("expected {d} coordinates, found {}", coords.len() - before)));
        }
    }
    if let Some((k, _)) = it.next() {
        return Err(HrcpError::parse(k, format!("unexpected data after {n} points")));
    }
    Instance::from_flat(d, coords)
}

pub fn write_labels<W: Write>(labels: &[usize], mut out: W) -> Result<()> {
    writeln!(out, "{LABELS_MAGIC}")?;
    for l in labels {
        writeln!(out, "{l}")?;
    }
    Ok(())
}

pub fn read_labels<R: BufRead>(input: R) -> Result<Vec<usize>> {
    let (lines, _) = content_lines(input)?;
    let mut it = lines.into_iter();
    match it.next() {
        Some((_, l)) if l == LABELS_MAGIC => {}
        Some((k, l)) => return Err(HrcpError::parse(k, format!("expected `{LABELS_MAGIC}`, found `{l}`"))),
        None => return Err(HrcpError::parse(1, "empty labels file")),
    }
    it.map(|(k, l)| parse_usize(k, &l, "label")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Clustering;
    use crate::solver::{solve, SolveLimits};

    fn read_str(s: &str) -> Result<Instance> {
        read_instance(s.as_bytes())
    }

    #[test]
    fn round_trip_small() {
        let x = Instance::new(vec![vec![0.1], vec![-3.0e-17]]).unwrap();
        let text = instance_to_string(&x);
        assert_eq!(text, "hrcp 1\n2 1\n0.1\n-0.00000000000000003\n");
        assert_eq!(read_str(&text).unwrap(), x);
    }

    #[test]
    fn short_file_reports_line() {
        let err = read_str("hrcp 1\n3 1\n0\n1\n").unwrap_err();
        assert!(matches!(err, HrcpError::Parse { line: 4, .. }), "{err}");
        let err = read_str("hrcp 1\n3 1\n0\n1").unwrap_err();
        assert!(matches!(err, HrcpError::Parse { line: 4, .. }), "{err}");
    }

    #[test]
    fn nan_is_rejected() {
        let err = read_str("hrcp 1\n2 2\n0 1\nNaN 2\n").unwrap_err();
        assert!(matches!(err, HrcpError::Parse { line: 4, .. }), "{err}");
        assert!(read_str("hrcp 1\n1 1\ninf\n").is_err());
    }

    #[test]
    fn malformed_headers() {
        assert!(matches!(read_str("hrcp 2\n1 1\n0\n"), Err(HrcpError::Parse { line: 1, .. })));
        assert!(matches!(read_str("hrcp 1\n1\n0\n"), Err(HrcpError::Parse { line: 2, .. })));
        assert!(matches!(read_str("hrcp 1\n1 2\n0\n"), Err(HrcpError::Parse { line: 3, .. })));
        assert!(matches!(read_str("hrcp 1\n1 1\n0\n1\n"), Err(HrcpError::Parse { line: 4, .. })));
    }

    #[test]
    fn comments_are_skipped() {
        let x = read_str("# generated\nhrcp 1\n# n d\n2 1\n0\n# mid\n1\n").unwrap();
        assert_eq!(x.len(), 2);
    }

    #[test]
    fn labels_round_trip() {
        let mut buf = Vec::new();
        write_labels(&[0, 2, 1], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "hrcp-labels 1\n0\n2\n1\n");
        assert_eq!(read_labels(&buf[..]).unwrap(), vec![0, 2, 1]);
    }

    #[test]
    fn generator_rejects_bad_params() {
        let ok = GenParams { d: 2, n: 10, p: 2, s: 0.5, seed: 1 };
        assert!(generate(&ok).is_ok());
        assert!(generate(&GenParams { d: 0, ..ok }).is_err());
        assert!(generate(&GenParams { n: 0, ..ok }).is_err());
        assert!(generate(&GenParams { p: 0, ..ok }).is_err());
        assert!(generate(&GenParams { s: 1.5, ..ok }).is_err());
        assert!(generate(&GenParams { s: -0.1, ..ok }).is_err());
    }

    #[test]
    fn zero_dispersion_collapses_to_origins() {
        let g = generate(&GenParams { d: 2, n: 100, p: 3, s: 0.0, seed: 11 }).unwrap();
        for (i, x) in g.instance.points().enumerate() {
            assert_eq!(x, &g.origins[g.labels[i]][..]);
        }
        let out = solve(&g.instance, 3, &SolveLimits::default(), &mut |_| {}).unwrap();
        assert_eq!(out.upper_bound, 0.0);
    }

    #[test]
    fn generated_points_stay_in_bounds() {
        for seed in 0..20 {
            let s = seed as f64 / 19.0;
            let g = generate(&GenParams { d: 3, n: 200, p: 4, s, seed }).unwrap();
            let bound = 1.0 + s / 2.0;
            assert!(g.instance.points().flatten().all(|&v| -bound <= v && v <= bound));
            assert_eq!(g.instance.len(), 200);
            assert_eq!(g.instance.dim(), 3);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let params = GenParams { d: 3, n: 1000, p: 4, s: 0.2, seed: 42 };
        assert_eq!(generate(&params).unwrap(), generate(&params).unwrap());
        let other = generate(&GenParams { seed: 43, ..params }).unwrap();
        assert_ne!(other.instance, generate(&params).unwrap().instance);
    }

    #[test]
    fn label_clusters_fit_in_side_s_cubes() {
        let params = GenParams { d: 3, n: 300, p: 4, s: 0.05, seed: 5 };
        let g = generate(&params).unwrap();
        let c = Clustering::from_labels(&g.instance, params.p, &g.labels).unwrap();
        assert!(c.total_span() <= (params.p * params.d) as f64 * params.s);
    }

    #[test]
    fn generated_file_round_trips_bit_exactly() {
        let g = generate(&GenParams { d: 3, n: 500, p: 4, s: 0.3, seed: 9 }).unwrap();
        let back = read_str(&instance_to_string(&g.instance)).unwrap();
        for (a, b) in g.instance.points().flatten().zip(back.points().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
