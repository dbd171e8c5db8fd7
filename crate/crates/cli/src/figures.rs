//! Parameter sweeps behind the three figures, written as CSV.

use std::collections::BTreeMap;
use std::io::Write;

use ncd_core::bounds::{triangle_from_distance, witness_distance};
use ncd_core::fock::outer;
use ncd_core::fock::DEFAULT_TAIL_TOL;
use ncd_core::husimi::{cat_alpha_star, cat_qmax, gamma_n};
use ncd_core::metrics::trace_distance;
use ncd_core::special::heuristic_cutoff;
use ncd_core::states::{
    cat_classical_witness, cat_state, number_state, phase_randomized_coherent,
    vacuum_number_mixture, CatParams, CatWitness, Parity,
};
use ncd_core::{Error, Result, State, TruncationSpec};
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    /// Even cat state against its amplitude.
    Fig1,
    /// Odd cat state against its amplitude.
    Fig2,
    /// Vacuum and number-state mixture against the mixing weight.
    Fig3,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
        }
    }

    pub fn default_sweep(self) -> SweepSpec {
        match self {
            Figure::Fig1 | Figure::Fig2 => SweepSpec::new("beta", 0.05, 3.0, 60),
            Figure::Fig3 => {
                let mut s = SweepSpec::new("eta", 0.0, 1.0, 101);
                s.fixed.insert("n_max".into(), 4.0);
                s
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub parameter: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub fixed: BTreeMap<String, f64>,
}

impl SweepSpec {
    pub fn new(parameter: &str, from: f64, to: f64, steps: usize) -> Self {
        Self {
            parameter: parameter.into(),
            from,
            to,
            steps,
            fixed: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.from.partial_cmp(&self.to) != Some(std::cmp::Ordering::Less) {
            return Err(Error::InvalidParameter(format!(
                "sweep range [{}, {}] is empty",
                self.from, self.to
            )));
        }
        if self.steps < 2 {
            return Err(Error::InvalidParameter(
                "a sweep needs at least 2 steps".into(),
            ));
        }
        Ok(())
    }

    /// Evenly spaced points, both ends included.
    pub fn points(&self) -> Vec<f64> {
        let h = (self.to - self.from) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.to
                } else {
                    self.from + h * k as f64
                }
            })
            .collect()
    }
}

/// Options shared by every sweep.
#[derive(Clone, Debug)]
pub struct FigureOptions {
    /// Cutoff for every mode; `None` picks one per point.
    pub cutoff: Option<usize>,
    pub tail_tol: f64,
}

impl Default for FigureOptions {
    fn default() -> Self {
        Self {
            cutoff: None,
            tail_tol: DEFAULT_TAIL_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            // 17 significant digits round-trip every double
            w.write_record(row.iter().map(|x| format!("{x:.16e}")))?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

pub const CAT_COLUMNS: [&str; 6] = [
    "beta",
    "alpha_star",
    "lb_q",
    "ub_q",
    "d_sigma_beta",
    "d_sigma_alphastar",
];

/// One row of the cat-state figures. The odd-parity row carries the
/// distance to the phase-randomized coherent state of energy `alpha*^2`.
pub fn cat_row(parity: Parity, beta: f64, opts: &FigureOptions) -> Result<Vec<f64>> {
    let p = CatParams::new(parity, beta)?;
    let q = cat_qmax(&p);
    let a = cat_alpha_star(&p);
    let cutoff = opts
        .cutoff
        .unwrap_or_else(|| heuristic_cutoff(beta).max(heuristic_cutoff(a)));
    let trunc = TruncationSpec::new(vec![cutoff], opts.tail_tol)?;
    let psi = State::Pure(cat_state(&p, &trunc)?);
    let d_beta = witness_distance(&psi, &cat_classical_witness(CatWitness::AtBeta, &p)?)?;
    let d_star = witness_distance(&psi, &cat_classical_witness(CatWitness::AtAlphaStar, &p)?)?;
    let m = q.value.min(1.0);
    let mut row = vec![beta, a, 1.0 - m, (1.0 - m).sqrt(), d_beta, d_star];
    if parity == Parity::Odd {
        row.push(witness_distance(&psi, &phase_randomized_coherent(a * a)?)?);
    }
    Ok(row)
}

/// Lower and upper bounds for `(1 - eta)|0><0| + eta |n><n|`: the triangle
/// bound through `|n>` and convexity between the vacuum and `|n>`.
pub fn mixture_bounds(n: usize, eta: f64, opts: &FigureOptions) -> Result<(f64, f64)> {
    let trunc = TruncationSpec::new(vec![opts.cutoff.unwrap_or(n)], opts.tail_tol)?;
    let rho = vacuum_number_mixture(n, eta, &trunc)?;
    let delta_n = 1.0 - gamma_n(n);
    let d = trace_distance(&rho, &outer(&number_state(&[n], &trunc)?))?;
    let (lo, _) = triangle_from_distance(d, delta_n, delta_n);
    Ok((lo.value, eta * delta_n))
}

pub fn compute(fig: Figure, sweep: &SweepSpec, opts: &FigureOptions) -> Result<Table> {
    sweep.validate()?;
    let points = sweep.points();
    let (header, rows): (Vec<String>, Result<Vec<Vec<f64>>>) = match fig {
        Figure::Fig1 | Figure::Fig2 => {
            let parity = if fig == Figure::Fig1 {
                Parity::Even
            } else {
                Parity::Odd
            };
            let mut header: Vec<String> = CAT_COLUMNS.iter().map(|s| s.to_string()).collect();
            if parity == Parity::Odd {
                header.push("d_phase_randomized".into());
            }
            (
                header,
                points
                    .par_iter()
                    .map(|&b| cat_row(parity, b, opts))
                    .collect(),
            )
        }
        Figure::Fig3 => {
            let n_max = sweep.fixed.get("n_max").copied().unwrap_or(4.0) as usize;
            let mut header = vec!["eta".to_string()];
            for n in 1..=n_max {
                header.push(format!("lb_{n}"));
                header.push(format!("ub_{n}"));
            }
            let rows = points
                .par_iter()
                .map(|&eta| {
                    let mut row = vec![eta];
                    for n in 1..=n_max {
                        let (lo, hi) = mixture_bounds(n, eta, opts)?;
                        row.push(lo);
                        row.push(hi);
                    }
                    Ok(row)
                })
                .collect();
            (header, rows)
        }
    };
    Ok(Table {
        header,
        rows: rows?,
    })
}

/// A matplotlib script that plots the CSV at `csv_path`.
pub fn plot_script(fig: Figure, csv_path: &str) -> String {
    let body = match fig {
        Figure::Fig1 => {
            "ax.plot(x, col['lb_q'], '-', label='Q lower')\n\
             ax.plot(x, col['ub_q'], ':', label='Q upper')\n\
             ax.plot(x, col['d_sigma_beta'], '--', label='D to sigma_beta')\n\
             ax.plot(x, col['d_sigma_alphastar'], '-.', label='D to sigma_alpha*')\n\
             ax.set_xlabel('beta')\n\
             inset = ax.inset_axes([0.6, 0.1, 0.35, 0.35])\n\
             inset.plot(x, col['alpha_star'])\n\
             inset.set_title('alpha*', fontsize=8)\n"
        }
        Figure::Fig2 => {
            "ax.plot(x, col['lb_q'], '-', label='Q lower')\n\
             ax.plot(x, col['d_sigma_beta'], '--', label='D to sigma_beta')\n\
             ax.plot(x, col['d_sigma_alphastar'], '-.', label='D to sigma_alpha*')\n\
             ax.plot(x, col['d_phase_randomized'], ':', label='D to phase-randomized')\n\
             ax.set_xlabel('beta')\n\
             inset = ax.inset_axes([0.6, 0.1, 0.35, 0.35])\n\
             inset.plot(x, col['alpha_star'])\n\
             inset.set_title('alpha*', fontsize=8)\n"
        }
        Figure::Fig3 => {
            "n_max = sum(1 for h in header if h.startswith('lb_'))\n\
             for n in range(1, n_max + 1):\n\
             \x20   shade = str(0.6 * (n - 1) / max(n_max - 1, 1))\n\
             \x20   ax.plot(x, col[f'lb_{n}'], '-', color=shade, label=f'n={n} lower')\n\
             \x20   ax.plot(x, col[f'ub_{n}'], '--', color=shade, label=f'n={n} upper')\n\
             ax.set_xlabel('eta')\n"
        }
    };
    format!(
        "import csv\n\
         import matplotlib.pyplot as plt\n\
         \n\
         with open({csv_path:?}, newline='') as f:\n\
         \x20   rows = list(csv.reader(f))\n\
         header, data = rows[0], [[float(v) for v in r] for r in rows[1:]]\n\
         col = {{h: [r[i] for r in data] for i, h in enumerate(header)}}\n\
         x = col[header[0]]\n\
         \n\
         fig, ax = plt.subplots()\n\
         {body}\
         ax.set_ylabel('distance')\n\
         ax.legend(loc='upper left')\n\
         fig.savefig({png:?}, dpi=150)\n",
        png = format!("{}.png", csv_path.trim_end_matches(".csv")),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_points() {
        let s = SweepSpec::new("beta", 0.05, 3.0, 60);
        let p = s.points();
        assert_eq!(p.len(), 60);
        assert_eq!(p[0], 0.05);
        assert_eq!(p[59], 3.0);
        assert!((p[1] - 0.1).abs() < 1e-15);
        assert!(SweepSpec::new("eta", 1.0, 0.0, 5).validate().is_err());
        assert!(SweepSpec::new("eta", 0.0, 1.0, 1).validate().is_err());
    }

    #[test]
    fn fig3_endpoint() {
        let (lo, hi) = mixture_bounds(2, 1.0, &FigureOptions::default()).unwrap();
        let want = 1.0 - 2.0 * (-2f64).exp();
        assert!((lo - want).abs() < 1e-12 && (hi - want).abs() < 1e-12);
        let (lo, hi) = mixture_bounds(3, 0.1, &FigureOptions::default()).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0);
    }

    #[test]
    fn cat_rows_match_closed_forms() {
        let opts = FigureOptions::default();
        let r = cat_row(Parity::Even, 2.0, &opts).unwrap();
        assert!((r[4] - (1.0 - (-8f64).exp()) / 2.0).abs() < 1e-10);
        let r = cat_row(Parity::Odd, 1.0, &opts).unwrap();
        assert_eq!(r.len(), 7);
        assert!((r[4] - (1.0 + (-2f64).exp()) / 2.0).abs() < 1e-10);
        assert!(r[2] <= r[4] && r[2] <= r[5] && r[2] <= r[6]);
    }

    #[test]
    fn csv_format() {
        let t = Table {
            header: vec!["a".into(), "b".into()],
            rows: vec![vec![0.1, 1.0 / 3.0]],
        };
        let s = t.to_csv_string();
        assert_eq!(s, "a,b\n1.0000000000000001e-1,3.3333333333333331e-1\n");
        for line in s.lines().skip(1) {
            for v in line.split(',') {
                let x: f64 = v.parse().unwrap();
                assert_eq!(format!("{x:.16e}"), v);
            }
        }
    }
}
