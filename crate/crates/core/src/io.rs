//! File formats.
//!
//! * Edge list: one `i j` pair per line, 0-based, `#` starts a comment. The
//!   writer emits a `# n=<N>` header so isolated nodes survive a round trip.
//! * Point cloud: CSV, one point per row, no header.
//! * Dense matrix: CSV with a first line `n=<N>` followed by `N` rows of `N`
//!   values; `inf` marks a missing connection.
//! * MatrixMarket: `coordinate` real/integer/pattern, `symmetric` or
//!   `general`, 1-based.
//!
//! Floating values are written with 17 significant digits, which round-trips
//! every `f64` exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::{DissimilarityMatrix, PointCloud, UnweightedGraph, WeightedGraph, INFINITE};
use crate::pipeline::{SweepOutcome, SweepResult};
use crate::spectral::{Embedding, SpectrumReport};
use crate::twonn::{DimensionEstimate, HistogramBin};

pub fn format_f64(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn parse_f64(token: &str, line: usize) -> Result<f64> {
    match token.trim() {
        "inf" | "Inf" | "INF" | "infinity" | "Infinity" => Ok(INFINITE),
        t => t.parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("invalid number {t:?}") }),
    }
}

fn parse_usize(token: &str, line: usize) -> Result<usize> {
    token
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::Parse { line, msg: format!("invalid index {token:?}") })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

// ---------------------------------------------------------------- edge list

pub fn read_edge_list<R: BufRead>(reader: R) -> Result<UnweightedGraph> {
    let mut declared_n: Option<usize> = None;
    let mut edges = Vec::new();
    let mut max_index: Option<usize> = None;
    for (k, line) in reader.lines().enumerate() {
        let line_no = k + 1;
        let line = line?;
        let (content, comment) = match line.find('#') {
            Some(p) => (&line[..p], Some(&line[p + 1..])),
            None => (line.as_str(), None),
        };
        if let Some(c) = comment {
            if let Some(v) = c.trim().strip_prefix("n=") {
                declared_n = Some(parse_usize(v, line_no)?);
            }
        }
        let mut tokens = content.split_whitespace();
        let Some(a) = tokens.next() else { continue };
        let b = tokens
            .next()
            .ok_or_else(|| Error::Parse { line: line_no, msg: "expected two node indices".into() })?;
        if tokens.next().is_some() {
            return Err(Error::Parse { line: line_no, msg: "expected exactly two node indices".into() });
        }
        let (i, j) = (parse_usize(a, line_no)?, parse_usize(b, line_no)?);
        if i == j {
            return Err(Error::Parse { line: line_no, msg: format!("self-loop at node {i}") });
        }
        max_index = Some(max_index.map_or(i.max(j), |m| m.max(i).max(j)));
        edges.push((i, j));
    }
    let n = match (declared_n, max_index) {
        (Some(n), Some(m)) if m >= n => {
            return Err(Error::Validation(format!("edge list declares n={n} but uses node {m}")));
        }
        (Some(n), _) => n,
        (None, Some(m)) => m + 1,
        (None, None) => 0,
    };
    UnweightedGraph::from_edges(n, edges)
}

pub fn write_edge_list<W: Write>(g: &UnweightedGraph, mut w: W) -> Result<()> {
    writeln!(w, "# n={}", g.n())?;
    for (i, j) in g.edges() {
        writeln!(w, "{i} {j}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_edge_list(path: &Path) -> Result<UnweightedGraph> {
    read_edge_list(open(path)?)
}

pub fn save_edge_list(g: &UnweightedGraph, path: &Path) -> Result<()> {
    write_edge_list(g, create(path)?)
}

// -------------------------------------------------------------- point cloud

pub fn read_points<R: BufRead>(reader: R) -> Result<PointCloud> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line_no = k + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line.split(',').map(|t| parse_f64(t, line_no)).collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("row has {} values, expected {}", row.len(), first.len()),
                });
            }
        }
        rows.push(row);
    }
    PointCloud::from_rows(rows)
}

pub fn write_points<W: Write>(p: &PointCloud, mut w: W) -> Result<()> {
    for row in p.iter() {
        let line: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_points(path: &Path) -> Result<PointCloud> {
    read_points(open(path)?)
}

pub fn save_points(p: &PointCloud, path: &Path) -> Result<()> {
    write_points(p, create(path)?)
}

// ------------------------------------------------------------- dense matrix

pub fn read_dense_matrix<R: BufRead>(reader: R) -> Result<Array2<f64>> {
    let mut lines = reader.lines().enumerate().filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()));
    let (_, header) = lines.next().ok_or_else(|| Error::Parse { line: 1, msg: "empty matrix file".into() })?;
    let header = header?;
    let n = header
        .trim()
        .strip_prefix("n=")
        .ok_or_else(|| Error::Parse { line: 1, msg: "expected header n=<N>".into() })
        .and_then(|v| parse_usize(v, 1))?;
    let mut data = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (k, line) in lines {
        let line_no = k + 1;
        let line = line?;
        if rows == n {
            return Err(Error::Parse { line: line_no, msg: format!("more than {n} rows") });
        }
        let before = data.len();
        for t in line.split(',') {
            data.push(parse_f64(t, line_no)?);
        }
        if data.len() - before != n {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("row has {} values, expected {n}", data.len() - before),
            });
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse { line: rows + 2, msg: format!("expected {n} rows, found {rows}") });
    }
    Ok(Array2::from_shape_vec((n, n), data).expect("n x n"))
}

pub fn write_dense_matrix<W: Write>(m: &Array2<f64>, mut w: W) -> Result<()> {
    writeln!(w, "n={}", m.nrows())?;
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

// ------------------------------------------------------------- MatrixMarket

/// Entries of a MatrixMarket coordinate file, 0-based, both triangles.
pub struct MatrixMarket {
    pub n: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<MatrixMarket> {
    let mut lines = reader.lines().enumerate();
    let (_, banner) = lines.next().ok_or_else(|| Error::Parse { line: 1, msg: "empty file".into() })?;
    let banner = banner?.to_ascii_lowercase();
    let words: Vec<&str> = banner.split_whitespace().collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" || words[2] != "coordinate" {
        return Err(Error::Parse { line: 1, msg: "expected %%MatrixMarket matrix coordinate banner".into() });
    }
    let pattern = match words[3] {
        "real" | "integer" => false,
        "pattern" => true,
        other => return Err(Error::Parse { line: 1, msg: format!("unsupported field {other:?}") }),
    };
    let symmetric = match words[4] {
        "symmetric" => true,
        "general" => false,
        other => return Err(Error::Parse { line: 1, msg: format!("unsupported symmetry {other:?}") }),
    };

    let mut size: Option<(usize, usize)> = None;
    let mut raw = Vec::new();
    for (k, line) in lines {
        let line_no = k + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let tokens: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if tokens.len() != 3 {
                    return Err(Error::Parse { line: line_no, msg: "expected size line: rows cols nnz".into() });
                }
                let (r, c) = (parse_usize(tokens[0], line_no)?, parse_usize(tokens[1], line_no)?);
                if r != c {
                    return Err(Error::Validation(format!("matrix is {r} x {c}, expected square")));
                }
                size = Some((r, parse_usize(tokens[2], line_no)?));
            }
            Some((n, _)) => {
                let want = if pattern { 2 } else { 3 };
                if tokens.len() != want {
                    return Err(Error::Parse { line: line_no, msg: format!("expected {want} fields") });
                }
                let i = parse_usize(tokens[0], line_no)?;
                let j = parse_usize(tokens[1], line_no)?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(Error::Parse { line: line_no, msg: format!("index ({i}, {j}) out of range 1..={n}") });
                }
                let v = if pattern { 1.0 } else { parse_f64(tokens[2], line_no)? };
                raw.push((i - 1, j - 1, v, line_no));
            }
        }
    }
    let (n, nnz) = size.ok_or_else(|| Error::Parse { line: 1, msg: "missing size line".into() })?;
    if raw.len() != nnz {
        return Err(Error::Validation(format!("size line announces {nnz} entries, found {}", raw.len())));
    }
    let mut entries = Vec::with_capacity(raw.len() * 2);
    for (i, j, v, line_no) in raw {
        if symmetric && i < j {
            return Err(Error::Parse { line: line_no, msg: "symmetric storage expects the lower triangle".into() });
        }
        entries.push((i, j, v));
        if symmetric && i != j {
            entries.push((j, i, v));
        }
    }
    Ok(MatrixMarket { n, entries })
}

fn assemble(mm: &MatrixMarket, fill: f64) -> Result<Array2<f64>> {
    let n = mm.n;
    let mut m = Array2::from_elem((n, n), fill);
    let mut seen = Array2::from_elem((n, n), false);
    for i in 0..n {
        m[(i, i)] = 0.0;
    }
    for &(i, j, v) in &mm.entries {
        if seen[(i, j)] {
            return Err(Error::Validation(format!("entry ({i}, {j}) given twice")));
        }
        seen[(i, j)] = true;
        m[(i, j)] = v;
    }
    // A one-sided entry in general storage is an asymmetry.
    for i in 0..n {
        for j in 0..n {
            if i != j && seen[(i, j)] != seen[(j, i)] {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                return Err(Error::Asymmetric { i: i.min(j), j: i.max(j), a: if i < j { a } else { b }, b: if i < j { b } else { a } });
            }
        }
    }
    Ok(m)
}

pub fn write_matrix_market<W: Write>(m: &Array2<f64>, absent: f64, mut w: W) -> Result<()> {
    let n = m.nrows();
    let entries: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, m[(i, j)]))
        .filter(|&(_, _, v)| v != absent)
        .collect();
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(w, "{n} {n} {}", entries.len())?;
    for (i, j, v) in entries {
        writeln!(w, "{} {} {}", i + 1, j + 1, format_f64(v))?;
    }
    w.flush()?;
    Ok(())
}

fn is_matrix_market(path: &Path) -> Result<bool> {
    let mut first = String::new();
    open(path)?.read_line(&mut first)?;
    Ok(first.trim_start().to_ascii_lowercase().starts_with("%%matrixmarket"))
}

/// Loads a similarity matrix from MatrixMarket (absent entries are zero
/// weight) or dense CSV.
pub fn load_weighted(path: &Path) -> Result<WeightedGraph> {
    let m = if is_matrix_market(path)? {
        assemble(&read_matrix_market(open(path)?)?, 0.0)?
    } else {
        read_dense_matrix(open(path)?)?
    };
    WeightedGraph::new(m)
}

pub fn save_weighted_mtx(w: &WeightedGraph, path: &Path) -> Result<()> {
    write_matrix_market(w.weights(), 0.0, create(path)?)
}

/// Loads a dissimilarity matrix from dense CSV or MatrixMarket (absent
/// entries are [`INFINITE`]).
pub fn load_dissimilarity(path: &Path) -> Result<DissimilarityMatrix> {
    let m = if is_matrix_market(path)? {
        assemble(&read_matrix_market(open(path)?)?, INFINITE)?
    } else {
        read_dense_matrix(open(path)?)?
    };
    DissimilarityMatrix::new(m)
}

pub fn save_dissimilarity(m: &DissimilarityMatrix, path: &Path) -> Result<()> {
    write_dense_matrix(m.entries(), create(path)?)
}

// ------------------------------------------------------------- result tables

pub fn write_spectrum<W: Write>(r: &SpectrumReport, mut w: W) -> Result<()> {
    writeln!(w, "index,eigenvalue")?;
    for (i, v) in r.eigenvalues.iter().enumerate() {
        writeln!(w, "{i},{}", format_f64(*v))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_embedding<W: Write>(e: &Embedding, w: W) -> Result<()> {
    write_points(&e.to_point_cloud()?, w)
}

/// Columns `i, mu_sorted, d_i`; `d_i` is empty where the ratio is one.
pub fn write_d_curve<W: Write>(e: &DimensionEstimate, mut w: W) -> Result<()> {
    writeln!(w, "i,mu_sorted,d_i")?;
    for (k, d) in e.d_curve.iter().enumerate() {
        let d = d.map(format_f64).unwrap_or_default();
        writeln!(w, "{},{},{}", k + 1, format_f64(e.mu_sorted[k]), d)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_estimate_summary<W: Write>(e: &DimensionEstimate, mut w: W) -> Result<()> {
    writeln!(w, "d_star={}", format_f64(e.d_star))?;
    writeln!(w, "d_min={}", format_f64(e.d_min))?;
    writeln!(w, "d_max={}", format_f64(e.d_max))?;
    writeln!(w, "n={}", e.n)?;
    writeln!(w, "window_lo={}", e.window.0)?;
    writeln!(w, "window_hi={}", e.window.1)?;
    w.flush()?;
    Ok(())
}

pub fn write_histogram<W: Write>(bins: &[HistogramBin], mut w: W) -> Result<()> {
    writeln!(w, "bin_left,bin_right,count")?;
    for b in bins {
        writeln!(w, "{},{},{}", format_f64(b.left), format_f64(b.right), b.count)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `s, d_min, d_star, d_max, status`; failed steps leave the numeric
/// columns empty and carry the error in `status`.
pub fn write_sweep<W: Write>(r: &SweepResult, mut w: W) -> Result<()> {
    writeln!(w, "s,d_min,d_star,d_max,status")?;
    for rec in &r.records {
        match &rec.outcome {
            SweepOutcome::Estimate { d_star, d_min, d_max } => writeln!(
                w,
                "{},{},{},{},ok",
                rec.s,
                format_f64(*d_min),
                format_f64(*d_star),
                format_f64(*d_max)
            )?,
            SweepOutcome::Failed(msg) => writeln!(w, "{},,,,{:?}", rec.s, msg.replace(',', ";"))?,
        }
    }
    w.flush()?;
    Ok(())
}
