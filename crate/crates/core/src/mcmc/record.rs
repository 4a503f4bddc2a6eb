//! Per-step chain output.

use std::io::{self, Write};

pub const RECORD_HEADER: &str = "step,z,xi_x,log_mu_tilde,macro_acc,micro_acc,alpha_cg,alpha_f";

/// State after one step plus that step's decisions. The proposal fields are
/// not part of the CSV stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: u64,
    pub z: f64,
    pub xi_x: f64,
    pub log_mu_tilde: f64,
    pub macro_acc: bool,
    pub micro_acc: bool,
    pub alpha_cg: f64,
    pub alpha_f: Option<f64>,
    pub z_proposed: f64,
    /// Estimate computed for the proposal, when one was computed.
    pub log_mu_tilde_proposed: Option<f64>,
}

pub trait RecordSink {
    fn record(&mut self, r: &StepRecord) -> io::Result<()>;

    fn finish(&mut self) -> io::Result<()> {
        Ok(())
    }
}

impl RecordSink for Vec<StepRecord> {
    fn record(&mut self, r: &StepRecord) -> io::Result<()> {
        self.push(*r);
        Ok(())
    }
}

pub struct NullSink;

impl RecordSink for NullSink {
    fn record(&mut self, _: &StepRecord) -> io::Result<()> {
        Ok(())
    }
}

/// Calls the closure on every record.
pub struct FnSink<F>(pub F);

impl<F: FnMut(&StepRecord)> RecordSink for FnSink<F> {
    fn record(&mut self, r: &StepRecord) -> io::Result<()> {
        (self.0)(r);
        Ok(())
    }
}

/// Writes [`RECORD_HEADER`] and one line per record. Floats use the
/// shortest round-trip representation; `alpha_f` is empty when the
/// microscopic test did not run.
pub struct CsvSink<W: Write> {
    out: W,
    header_written: bool,
}

impl<W: Write> CsvSink<W> {
    pub fn new(out: W) -> Self {
        Self { out, header_written: false }
    }

    pub fn into_inner(self) -> W {
        self.out
    }

    fn header(&mut self) -> io::Result<()> {
        if !self.header_written {
            writeln!(self.out, "{RECORD_HEADER}")?;
            self.header_written = true;
        }
        Ok(())
    }
}

impl<W: Write> RecordSink for CsvSink<W> {
    fn record(&mut self, r: &StepRecord) -> io::Result<()> {
        self.header()?;
        write!(
            self.out,
            "{},{},{},{},{},{},{},",
            r.step, r.z, r.xi_x, r.log_mu_tilde, r.macro_acc as u8, r.micro_acc as u8, r.alpha_cg
        )?;
        match r.alpha_f {
            Some(a) => writeln!(self.out, "{a}"),
            None => writeln!(self.out),
        }
    }

    fn finish(&mut self) -> io::Result<()> {
        self.header()?;
        self.out.flush()
    }
}
