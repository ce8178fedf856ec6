//! Gnuplot script emission for the figure analogs. Plotting itself is
//! optional tooling; the tests only check that scripts reference the right
//! data files.

use std::io::Write;
use std::path::{Path, PathBuf};

/// Write `fig<N>.gp` into `out_dir`, referencing `data` (a CSV produced by
/// the harness). Returns the script path.
pub fn emit_figure_script(figure: u8, data: &Path, out_dir: &Path) -> std::io::Result<PathBuf> {
    let path = out_dir.join(format!("fig{figure}.gp"));
    let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
    let data = data.display();
    writeln!(f, "# gnuplot script, figure analog {figure}")?;
    writeln!(f, "set datafile separator ','")?;
    writeln!(f, "set datafile commentschars '#'")?;
    match figure {
        1 => {
            writeln!(f, "set xlabel 'log2 N'")?;
            writeln!(f, "set ylabel 'expected unnormalized square error'")?;
            writeln!(f, "set key top right")?;
            writeln!(
                f,
                "plot '{data}' using 2:3 with linespoints title 'finite N', \\"
            )?;
            writeln!(f, "     '{data}' using 2:4 with lines dt 2 title 'asymptote'")?;
        }
        2 | 5 => {
            writeln!(f, "set xlabel 'x = 2 v_out / delta'")?;
            writeln!(f, "set ylabel 'v_in'")?;
            writeln!(f, "set logscale xy")?;
            writeln!(
                f,
                "plot '{data}' using 2:3 with lines title 'inner (phi)', \\"
            )?;
            writeln!(f, "     '{data}' using 2:4 with lines title 'outer (psi)'")?;
        }
        3 => {
            writeln!(f, "set xlabel 'delta'")?;
            writeln!(f, "set ylabel 'median unnormalized square error'")?;
            writeln!(f, "set logscale y")?;
            writeln!(
                f,
                "plot for [alg in 'gamp fista omp'] \\"
            )?;
            writeln!(
                f,
                "  '<grep -v \"^#\" {data}' using 1:(strcol(2) eq alg ? $6 : NaN) \\"
            )?;
            writeln!(f, "  with linespoints title alg")?;
        }
        4 => {
            writeln!(f, "set xlabel 'iteration'")?;
            writeln!(f, "set ylabel 'median unnormalized square error'")?;
            writeln!(f, "set logscale y")?;
            writeln!(f, "plot for [alg in 'gamp fista omp'] \\")?;
            writeln!(
                f,
                "  '<grep -v \"^#\" {data}' using 3:(strcol(2) eq alg ? $6 : NaN) \\"
            )?;
            writeln!(f, "  with lines title alg")?;
        }
        6 => {
            writeln!(f, "set xlabel 'delta'")?;
            writeln!(f, "set ylabel 'median normalized-error squared norm'")?;
            writeln!(f, "set logscale y")?;
            writeln!(f, "plot for [alg in 'gamp biht glasso'] \\")?;
            writeln!(
                f,
                "  '<grep -v \"^#\" {data}' using 1:(strcol(2) eq alg ? $10 : NaN) \\"
            )?;
            writeln!(f, "  with linespoints title alg")?;
        }
        other => {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                format!("no figure analog numbered {other}"),
            ))
        }
    }
    f.flush()?;
    Ok(path)
}
