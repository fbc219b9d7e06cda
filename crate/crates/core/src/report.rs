//! Plain-text renderings: CPT rows and BER curves as CSV, curves as SVG.

use std::fmt::Write as _;

use crate::bn::Cpt;
use crate::experiment::SweepPoint;
use crate::modem::Modulation;

/// One line per CPT row: parent states, sample count, observed flag, probabilities.
pub fn cpt_rows_csv(cpt: &Cpt) -> String {
    let mut out = String::new();
    let mut header: Vec<String> = cpt.parents().iter().map(|p| p.name.clone()).collect();
    header.push("n".into());
    header.push("observed".into());
    header.extend(cpt.child().states.iter().cloned());
    let _ = writeln!(out, "{}", header.join(","));
    for (i, row) in cpt.rows().iter().enumerate() {
        let mut fields: Vec<String> = cpt
            .parent_states_of(i)
            .iter()
            .zip(cpt.parents())
            .map(|(&s, p)| p.states[s].clone())
            .collect();
        fields.push(row.n.to_string());
        fields.push(row.observed.to_string());
        fields.extend(row.probs.iter().map(|p| format!("{p:?}")));
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("mod,ebn0_db,n_bits,n_errors,ber,theory\n");
    for p in points {
        let theory = p.theory.map(|t| format!("{t:?}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{:?},{},{},{:?},{}",
            p.modulation, p.ebn0_db, p.n_bits, p.n_errors, p.ber, theory
        );
    }
    out
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 130.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;

fn colour(m: Modulation) -> &'static str {
    match m {
        Modulation::Dbpsk => "#1f77b4",
        Modulation::Dqpsk => "#d62728",
        Modulation::D8psk => "#2ca02c",
    }
}

/// Log-scale BER versus Eb/N0 chart. Zero-error points are left out of the
/// measured curves since they have no place on a log axis.
pub fn sweep_svg(points: &[SweepPoint]) -> String {
    let positive = points
        .iter()
        .flat_map(|p| [Some(p.ber), p.theory])
        .flatten()
        .filter(|&b| b > 0.0);
    let min_ber = positive.fold(1.0f64, f64::min);
    let decade_lo = min_ber.log10().floor().clamp(-12.0, -1.0);
    let (x_lo, x_hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p.ebn0_db), hi.max(p.ebn0_db))
    });
    let (x_lo, x_hi) = if x_lo < x_hi {
        (x_lo, x_hi)
    } else {
        (x_lo - 1.0, x_lo + 1.0)
    };

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |ber: f64| MARGIN_T + (ber.log10() / decade_lo) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    let mut d = 0.0;
    while d >= decade_lo {
        let y = sy(10f64.powf(d));
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN_L}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"##,
            MARGIN_L + plot_w,
            MARGIN_L - 6.0,
            y + 4.0
        );
        d -= 1.0;
    }
    let x_step = ((x_hi - x_lo) / 8.0).ceil().max(1.0);
    let mut x = x_lo.ceil();
    while x <= x_hi {
        let px = sx(x);
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.2}" y1="{MARGIN_T}" x2="{px:.2}" y2="{:.2}" stroke="#eee"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{x}</text>"##,
            MARGIN_T + plot_h,
            MARGIN_T + plot_h + 16.0
        );
        x += x_step;
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Eb/N0 (dB)</text>"#,
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">BER</text>"#,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0
    );

    let mut legend = Vec::new();
    for m in Modulation::ALL {
        let series: Vec<&SweepPoint> = points.iter().filter(|p| p.modulation == m).collect();
        if series.is_empty() {
            continue;
        }
        let measured: Vec<String> = series
            .iter()
            .filter(|p| p.ber > 0.0)
            .map(|p| format!("{:.2},{:.2}", sx(p.ebn0_db), sy(p.ber)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="2" points="{}"/>"#,
            colour(m),
            measured.join(" ")
        );
        legend.push((m.name().to_string(), colour(m), false));
        let theory: Vec<String> = series
            .iter()
            .filter_map(|p| {
                p.theory
                    .filter(|&t| t > 0.0 && t.log10() >= decade_lo)
                    .map(|t| (p.ebn0_db, t))
            })
            .map(|(x, t)| format!("{:.2},{:.2}", sx(x), sy(t)))
            .collect();
        if !theory.is_empty() {
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{}" stroke-width="1" stroke-dasharray="5,4" points="{}"/>"#,
                colour(m),
                theory.join(" ")
            );
            legend.push((format!("{} theory", m.name()), colour(m), true));
        }
    }
    for (i, (label, c, dashed)) in legend.iter().enumerate() {
        let y = MARGIN_T + 14.0 + 18.0 * i as f64;
        let x0 = MARGIN_L + plot_w + 10.0;
        let dash = if *dashed { r#" stroke-dasharray="5,4""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<line x1="{x0:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{c}" stroke-width="2"{dash}/><text x="{:.2}" y="{:.2}">{label}</text>"#,
            x0 + 24.0,
            x0 + 30.0,
            y + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bn::{CountTable, Variable};

    fn point(m: Modulation, e: f64, ber: f64) -> SweepPoint {
        SweepPoint {
            modulation: m,
            ebn0_db: e,
            n_bits: 1000,
            n_errors: (ber * 1000.0) as u64,
            ber,
            theory: None,
        }
    }

    #[test]
    fn cpt_csv_lists_every_row() {
        let cpt = CountTable::new(
            Variable::new("B", &["b1", "b2"]),
            vec![Variable::new("A", &["a1", "a2", "a3"])],
        )
        .into_cpt(0.0)
        .unwrap();
        let csv = cpt_rows_csv(&cpt);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "A,n,observed,b1,b2");
        assert_eq!(lines[2], "a2,0,false,0.5,0.5");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn svg_contains_one_curve_per_modulation() {
        let pts = vec![
            point(Modulation::Dbpsk, 0.0, 0.2),
            point(Modulation::Dbpsk, 5.0, 0.01),
            point(Modulation::Dbpsk, 10.0, 0.0),
            point(Modulation::Dqpsk, 0.0, 0.3),
            point(Modulation::Dqpsk, 5.0, 0.05),
        ];
        let svg = sweep_svg(&pts);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("DQPSK"));
        assert!(!svg.contains("NaN"));
        let csv = sweep_csv(&pts);
        assert_eq!(csv.lines().count(), 6);
    }
}
