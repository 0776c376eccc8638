use std::io::Write;

use clap::ValueEnum;
use qgw_core::rings::Rational;
use qgw_core::trace::ReductionTrace;

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

/// `(key, value)` rows as CSV with a header line.
pub fn write_csv<'a>(
    out: &mut impl Write,
    rows: impl IntoIterator<Item = (&'a str, &'a Rational)>,
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(["key", "value"]).map_err(io)?;
    for (key, value) in rows {
        w.write_record([key, value.to_string().as_str()]).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

/// Steps of a reduction, children before parents.
pub fn write_trace(out: &mut impl Write, trace: &ReductionTrace) -> std::io::Result<()> {
    for step in &trace.steps {
        writeln!(out, "{:<12} {} = {}", step.rule.to_string(), step.subject, step.value)?;
        for (sign, terms) in [("", &step.main), ("boundary ", &step.boundary)] {
            for t in terms.iter() {
                let factors = if t.factors.is_empty() { "1".to_string() } else { t.factors.join(" * ") };
                writeln!(out, "    {sign}{:>6} * {factors}", t.weight.to_string())?;
            }
        }
    }
    Ok(())
}
