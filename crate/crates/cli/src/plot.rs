//! gnuplot scripts for the generated CSV files.

use std::fmt::Write as _;

use crate::config::{Experiment, ExperimentConfig};

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

/// A gnuplot script that reads `csv` and writes `<csv stem>.png`.
pub fn script(cfg: &ExperimentConfig, csv: &str) -> String {
    let png = match csv.rsplit_once('.') {
        Some((stem, _)) => format!("{stem}.png"),
        None => format!("{csv}.png"),
    };
    let mut s = String::new();
    writeln!(s, "set datafile separator ','").unwrap();
    writeln!(s, "set datafile commentschars '#'").unwrap();
    writeln!(s, "set key autotitle columnhead").unwrap();
    writeln!(s, "set terminal pngcairo size 1200,800").unwrap();
    writeln!(s, "set output {}", quote(&png)).unwrap();
    let data = quote(csv);
    match cfg.pipeline {
        Experiment::Fig1 => {
            writeln!(s, "set view map").unwrap();
            writeln!(s, "set xlabel 'r'\nset ylabel 'theta'").unwrap();
            writeln!(s, "set multiplot layout 2,{}", cfg.omega_over_gamma.len()).unwrap();
            for col in [4, 5] {
                for w in &cfg.omega_over_gamma {
                    writeln!(
                        s,
                        "splot {data} skip 1 using 2:3:($1 == {w:?} ? ${col} : 1/0) with pm3d notitle"
                    )
                    .unwrap();
                }
            }
            writeln!(s, "unset multiplot").unwrap();
        }
        Experiment::Fig2 => {
            writeln!(s, "set xlabel 'gamma t'\nset ylabel 'S_L'").unwrap();
            let panels = cfg.theta.len() * cfg.omega_over_gamma.len();
            writeln!(s, "set multiplot layout {},{}", cfg.theta.len(), cfg.omega_over_gamma.len()).unwrap();
            for i in 0..panels {
                let (start, end) = (i * cfg.steps, (i + 1) * cfg.steps - 1);
                let every = format!("every ::{start}::{end}");
                writeln!(
                    s,
                    "plot for [c=5:8] {data} {every} using 4:c with lines dashtype (c == 5 ? 3 : 1)"
                )
                .unwrap();
            }
            writeln!(s, "unset multiplot").unwrap();
        }
        Experiment::Fig3 | Experiment::Fig4 | Experiment::Fig5 => {
            writeln!(s, "set xlabel 'J t'\nset ylabel 'S_L'").unwrap();
            let last = if cfg.pipeline == Experiment::Fig3 { 5 } else { 6 };
            let curves = cfg.k.len() * cfg.p.len();
            writeln!(s, "set multiplot layout 2,{}", curves.div_ceil(2)).unwrap();
            for i in 0..curves {
                let (start, end) = (i * cfg.steps, (i + 1) * cfg.steps - 1);
                writeln!(s, "plot for [c=4:{last}] {data} every ::{start}::{end} using 1:c with lines").unwrap();
            }
            writeln!(s, "unset multiplot").unwrap();
        }
        Experiment::Fig6 | Experiment::Fig7 => {
            writeln!(s, "set xlabel 'r'").unwrap();
            writeln!(s, "plot for [c=4:7] {data} using 3:c with lines").unwrap();
        }
        Experiment::Custom => unreachable!("resolved configs always name a figure pipeline"),
    }
    s
}
