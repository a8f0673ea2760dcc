//! CSV writers. Every float is printed as `{:.16e}` (17 significant digits).

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use num_complex::Complex64;
use sturmian::kernel_fit::FitResult;
use sturmian::solution::SolutionSample;
use sturmian::spectrum::Spectrum;

pub const SPECTRUM_HEADER: &str = "index,re_lambda,im_lambda,re_omega,im_omega,residual,method";

/// A CSV table assembled in memory and written in one go.
pub struct Table {
    text: String,
}

impl Table {
    pub fn new(header: &str) -> Table {
        Table {
            text: format!("{header}\n"),
        }
    }

    fn row(&mut self, fields: impl IntoIterator<Item = String>) {
        let fields: Vec<String> = fields.into_iter().collect();
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        fs::write(path, &self.text)
    }

    #[cfg(test)]
    pub fn as_str(&self) -> &str {
        &self.text
    }
}

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

fn re_im(z: Complex64) -> [String; 2] {
    [f(z.re), f(z.im)]
}

/// `index,re_lambda,im_lambda,re_omega,im_omega,residual,method`. With
/// `method` set, that label replaces the per-row method.
pub fn spectrum(spectrum: &Spectrum, method: Option<&str>) -> Table {
    let mut t = Table::new(SPECTRUM_HEADER);
    for e in &spectrum.entries {
        let mut row = vec![e.index.to_string()];
        row.extend(re_im(e.lambda));
        row.extend(re_im(e.omega));
        row.push(f(e.residual));
        row.push(method.map_or_else(|| e.method.to_string(), str::to_string));
        t.row(row);
    }
    t
}

/// `omega,re_char,im_char`.
pub fn characteristic(samples: &[(f64, Complex64)]) -> Table {
    let mut t = Table::new("omega,re_char,im_char");
    for &(w, v) in samples {
        let mut row = vec![f(w)];
        row.extend(re_im(v));
        t.row(row);
    }
    t
}

/// `n,re_a,im_a,re_b,im_b`.
pub fn coefficients(fit: &FitResult) -> Table {
    let mut t = Table::new("n,re_a,im_a,re_b,im_b");
    for (n, (a, b)) in fit.a.iter().zip(&fit.b).enumerate() {
        let mut row = vec![n.to_string()];
        row.extend(re_im(*a));
        row.extend(re_im(*b));
        t.row(row);
    }
    t
}

/// `n_fit,eps1,eps2,rms1,rms2,condition,re_h,im_h,min_g_ratio`.
pub fn fit_summary(fit: &FitResult, h: Complex64, min_ratio: f64) -> Table {
    let mut t = Table::new("n_fit,eps1,eps2,rms1,rms2,condition,re_h,im_h,min_g_ratio");
    let mut row = vec![fit.n_fit.to_string()];
    row.extend([fit.eps1, fit.eps2, fit.rms1, fit.rms2, fit.condition].map(f));
    row.extend(re_im(h));
    row.push(f(min_ratio));
    t.row(row);
    t
}

pub const SOLUTION_HEADER: &str = "y,re_v1,im_v1,re_dv1,im_dv1,re_v2,im_v2,re_dv2,im_dv2,\
re_v1_omega,im_v1_omega,re_dv1_omega,im_dv1_omega,re_v2_omega,im_v2_omega,re_dv2_omega,im_dv2_omega";

/// One row per grid node; see [`SOLUTION_HEADER`].
pub fn solution(rows: &[(f64, SolutionSample)]) -> Table {
    let mut t = Table::new(SOLUTION_HEADER);
    for (y, s) in rows {
        let mut row = vec![f(*y)];
        for pair in [s.v, s.dv] {
            row.extend(re_im(pair[0]));
        }
        for pair in [s.v, s.dv] {
            row.extend(re_im(pair[1]));
        }
        for pair in [s.v_omega, s.dv_omega] {
            row.extend(re_im(pair[0]));
        }
        for pair in [s.v_omega, s.dv_omega] {
            row.extend(re_im(pair[1]));
        }
        t.row(row);
    }
    t
}

/// `y,re_phi0,im_phi0,re_psi0,im_psi0,...` over the grid.
pub fn formal_powers(nodes: &[f64], phi: &[&[Complex64]], psi: &[&[Complex64]]) -> Table {
    let mut header = String::from("y");
    for k in 0..phi.len() {
        write!(header, ",re_phi{k},im_phi{k},re_psi{k},im_psi{k}").unwrap();
    }
    let mut t = Table::new(&header);
    for (i, y) in nodes.iter().enumerate() {
        let mut row = vec![f(*y)];
        for (p, s) in phi.iter().zip(psi) {
            row.extend(re_im(p[i]));
            row.extend(re_im(s[i]));
        }
        t.row(row);
    }
    t
}
