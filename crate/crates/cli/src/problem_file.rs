//! INI-style problem files.
//!
//! ```ini
//! [problem]
//! A = 1
//! B = 2
//! p = y
//! q = 1/(4*y) + 2*y/(y-1/2)^2
//! r = y
//!
//! [boundary]
//! row1 = 1, 0, 0, 0
//! row2 = 0, 0, 1, 0
//!
//! [solver]
//! omega_min = 1
//! omega_max = 101
//! ```
//!
//! Blank lines and lines starting with `#` or `;` are ignored.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use sturmian::liouville::MapMode;
use sturmian::problem::parse_complex;
use sturmian::solution::SolverConfig;
use sturmian::spectrum::{Rect, SearchConfig};
use sturmian::{BoundaryConditions, SlProblem};

/// A problem file error, with the 1-based line it refers to (0 when the
/// error concerns the file as a whole).
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ParseError {}

fn fail<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

const SECTIONS: [(&str, &[&str]); 3] = [
    ("problem", &["A", "B", "p", "q", "r"]),
    ("boundary", &["row1", "row2"]),
    (
        "solver",
        &[
            "mode",
            "N_powers",
            "N_fit",
            "grid_points",
            "omega_min",
            "omega_max",
            "scan_step",
            "omega_cut",
            "tau_max",
            "max_count",
            "g_slope",
            "complex_search",
            "re_min",
            "re_max",
            "im_min",
            "im_max",
        ],
    ),
];

#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub problem: SlProblem,
    pub boundary: BoundaryConditions,
    pub solver: SolverConfig,
    pub search: SearchConfig,
    /// `tau_max` as written; `None` means the problem-dependent default.
    pub tau_max: Option<f64>,
}

type Section = BTreeMap<String, (usize, String)>;

impl ProblemFile {
    pub fn parse(text: &str) -> Result<ProblemFile, ParseError> {
        let mut sections: BTreeMap<&str, (usize, Section)> = BTreeMap::new();
        let mut current: Option<&str> = None;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') || content.starts_with(';') {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let Some(name) = name.strip_suffix(']') else {
                    return fail(line, "unterminated section header");
                };
                let name = name.trim();
                let Some((known, _)) = SECTIONS.iter().find(|(s, _)| *s == name) else {
                    return fail(line, format!("unknown section [{name}]"));
                };
                if sections.contains_key(known) {
                    return fail(line, format!("section [{name}] appears twice"));
                }
                sections.insert(known, (line, Section::new()));
                current = Some(known);
                continue;
            }
            let Some(section) = current else {
                return fail(line, "key outside of any section");
            };
            let Some((key, value)) = content.split_once('=') else {
                return fail(line, "expected `key = value`");
            };
            let (key, value) = (key.trim(), value.trim());
            let allowed = SECTIONS.iter().find(|(s, _)| *s == section).unwrap().1;
            if !allowed.contains(&key) {
                return fail(line, format!("unknown key `{key}` in [{section}]"));
            }
            if value.is_empty() {
                return fail(line, format!("`{key}` has no value"));
            }
            let entries = &mut sections.get_mut(section).unwrap().1;
            if entries.insert(key.to_string(), (line, value.to_string())).is_some() {
                return fail(line, format!("`{key}` is set twice"));
            }
        }
        let empty = (0, Section::new());
        let get = |name: &str| sections.get(name).unwrap_or(&empty);
        let problem = parse_problem(get("problem"))?;
        let boundary = parse_boundary(get("boundary"))?;
        let (solver, search, tau_max) = parse_solver(get("solver"))?;
        Ok(ProblemFile {
            problem,
            boundary,
            solver,
            search,
            tau_max,
        })
    }
}

fn required<'a>(section: &'a (usize, Section), name: &str, key: &str) -> Result<&'a (usize, String), ParseError> {
    match section.1.get(key) {
        Some(entry) => Ok(entry),
        None if section.0 == 0 => fail(0, format!("missing section [{name}]")),
        None => fail(section.0, format!("[{name}] is missing `{key}`")),
    }
}

fn real(line: usize, key: &str, value: &str) -> Result<f64, ParseError> {
    match parse_complex(value) {
        Ok(c) if c.im == 0.0 && c.re.is_finite() => Ok(c.re),
        Ok(_) => fail(line, format!("`{key}` must be a finite real number")),
        Err(e) => fail(line, format!("`{key}`: {e}")),
    }
}

fn count(line: usize, key: &str, value: &str) -> Result<usize, ParseError> {
    value
        .parse::<usize>()
        .or_else(|_| fail(line, format!("`{key}` must be a nonnegative integer")))
}

fn parse_problem(section: &(usize, Section)) -> Result<SlProblem, ParseError> {
    let (la, a) = required(section, "problem", "A")?;
    let (lb, b) = required(section, "problem", "B")?;
    let a = real(*la, "A", a)?;
    let b = real(*lb, "B", b)?;
    if !(a < b) {
        return fail(*lb, format!("need A < B, got [{a}, {b}]"));
    }
    let mut exprs = Vec::new();
    for key in ["p", "q", "r"] {
        let (line, text) = required(section, "problem", key)?;
        match sturmian::Expr::parse(text) {
            Ok(e) => exprs.push(e),
            Err(e) => return fail(*line, format!("`{key}`: {e}")),
        }
    }
    let r = exprs.pop().unwrap();
    let q = exprs.pop().unwrap();
    let p = exprs.pop().unwrap();
    SlProblem::from_exprs(a, b, p, q, r).or_else(|e| fail(section.0, e.to_string()))
}

fn parse_boundary(section: &(usize, Section)) -> Result<BoundaryConditions, ParseError> {
    let mut rows = [[Complex64::new(0.0, 0.0); 4]; 2];
    for (i, key) in ["row1", "row2"].into_iter().enumerate() {
        let (line, text) = required(section, "boundary", key)?;
        let entries: Vec<&str> = text.split(',').map(str::trim).collect();
        if entries.len() != 4 {
            return fail(
                *line,
                format!("`{key}` needs four comma-separated entries, got {}", entries.len()),
            );
        }
        for (j, entry) in entries.iter().enumerate() {
            rows[i][j] = parse_complex(entry).or_else(|e| fail(*line, format!("`{key}` entry {}: {e}", j + 1)))?;
        }
    }
    BoundaryConditions::new(rows).or_else(|e| fail(section.0, e.to_string()))
}

fn parse_solver(section: &(usize, Section)) -> Result<(SolverConfig, SearchConfig, Option<f64>), ParseError> {
    let mut solver = SolverConfig {
        mode: MapMode::Endpoint,
        ..SolverConfig::default()
    };
    let mut search = SearchConfig::default();
    let mut tau_max = None;
    let mut complex_search = None;
    let mut rect = [None; 4];
    let mut powers = 60;
    for (key, (line, value)) in &section.1 {
        let line = *line;
        match key.as_str() {
            "mode" => {
                solver.mode = match value.as_str() {
                    "endpoint" => MapMode::Endpoint,
                    "symmetric" => MapMode::Symmetric,
                    other => return fail(line, format!("mode must be `endpoint` or `symmetric`, got `{other}`")),
                }
            }
            "N_powers" => powers = count(line, key, value)?,
            "N_fit" => solver.n_fit = Some(count(line, key, value)?),
            "grid_points" => solver.grid_points = count(line, key, value)?,
            "omega_min" => search.omega_min = real(line, key, value)?,
            "omega_max" => search.omega_max = real(line, key, value)?,
            "scan_step" => search.scan_step = real(line, key, value)?,
            "omega_cut" => search.omega_cut = real(line, key, value)?,
            "tau_max" => tau_max = Some(real(line, key, value)?),
            "max_count" => search.max_count = Some(count(line, key, value)?),
            "g_slope" => {
                solver.g_slope = Some(parse_complex(value).or_else(|e| fail(line, format!("`g_slope`: {e}")))?)
            }
            "complex_search" => {
                complex_search = Some(match value.as_str() {
                    "true" => (line, true),
                    "false" => (line, false),
                    _ => return fail(line, "complex_search must be `true` or `false`"),
                })
            }
            "re_min" => rect[0] = Some(real(line, key, value)?),
            "re_max" => rect[1] = Some(real(line, key, value)?),
            "im_min" => rect[2] = Some(real(line, key, value)?),
            "im_max" => rect[3] = Some(real(line, key, value)?),
            _ => unreachable!("keys are validated while reading"),
        }
    }
    solver.max_order = powers;
    if let Some(n) = solver.n_fit {
        if n > powers {
            return fail(section.1["N_fit"].0, format!("N_fit = {n} exceeds N_powers = {powers}"));
        }
    }
    if !(search.scan_step > 0.0) {
        return fail(section.1["scan_step"].0, "scan_step must be positive");
    }
    if !(search.omega_cut > 0.0) {
        return fail(section.1["omega_cut"].0, "omega_cut must be positive");
    }
    if !(search.omega_min < search.omega_max) {
        let line = section.1.get("omega_max").map_or(section.0, |e| e.0);
        return fail(line, "omega_min must be below omega_max");
    }
    if let Some((line, true)) = complex_search {
        let [Some(re0), Some(re1), Some(im0), Some(im1)] = rect else {
            return fail(line, "complex_search needs re_min, re_max, im_min and im_max");
        };
        search.rect = Some(Rect::new((re0, re1), (im0, im1)).or_else(|e| fail(line, e.to_string()))?);
    }
    Ok((solver, search, tau_max))
}
