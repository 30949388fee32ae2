//! Trace files: per-sample CSV and the packet stream.

use std::io::Write;

use crate::error::Result;
use crate::quantizer::DecoderGeometry;
use crate::sim::SimTrace;

fn decoder_name(d: DecoderGeometry) -> &'static str {
    match d {
        DecoderGeometry::Centroid => "centroid",
        DecoderGeometry::HalfSpan => "half-span",
    }
}

/// Column names in file order for an `n`-dimensional state.
pub fn csv_columns(n: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for prefix in ["x", "xhat", "xr", "C", "L", "eq", "eqbar"] {
        cols.extend((1..=n).map(|i| format!("{prefix}_{i}")));
    }
    cols.extend(
        ["ehat_norm", "er_norm", "beta_d", "thm1_envelope", "tx", "k"]
            .iter()
            .map(|s| s.to_string()),
    );
    cols.extend((1..=n).map(|i| format!("pe_{i}")));
    cols
}

/// `# key=value` header lines, the column line, then one row per sample.
/// Packet indices are filled on rows that carry a packet.
pub fn write_csv<W: Write>(trace: &SimTrace, mut w: W) -> Result<()> {
    let m = &trace.meta;
    writeln!(w, "# scheme={}", m.scheme)?;
    writeln!(w, "# n={}", m.state_dim)?;
    writeln!(w, "# N={}", m.levels)?;
    writeln!(w, "# T={}", m.period)?;
    writeln!(w, "# dt={}", m.dt)?;
    writeln!(w, "# horizon={}", m.horizon)?;
    writeln!(w, "# seed={}", m.seed)?;
    writeln!(w, "# rng={}", m.rng)?;
    writeln!(w, "# disturbance={}", m.disturbance)?;
    writeln!(w, "# decoder={}", decoder_name(m.decoder))?;
    writeln!(w, "{}", csv_columns(m.state_dim).join(","))?;

    let mut row = String::new();
    for s in &trace.samples {
        row.clear();
        row.push_str(&s.t.to_string());
        for v in [&s.x, &s.xhat, &s.xr, &s.center, &s.range, &s.eq, &s.eqbar] {
            for x in v.iter() {
                row.push(',');
                row.push_str(&x.to_string());
            }
        }
        for x in [s.ehat_norm, s.er_norm, s.beta_d, s.thm1_envelope] {
            row.push(',');
            row.push_str(&x.to_string());
        }
        row.push_str(if s.tx { ",1," } else { ",0," });
        row.push_str(&s.k.to_string());
        let packet =
            s.tx.then(|| trace.transmissions.get(s.k as usize))
                .flatten()
                .and_then(|t| t.packet.as_ref());
        for i in 0..m.state_dim {
            row.push(',');
            if let Some(p) = packet {
                row.push_str(&p.indices[i].to_string());
            }
        }
        row.push('\n');
        w.write_all(row.as_bytes())?;
    }
    Ok(())
}

pub fn csv_string(trace: &SimTrace) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(trace, &mut buf)?;
    Ok(String::from_utf8(buf).expect("ascii output"))
}

/// Concatenated wire records of every transmitted packet.
pub fn write_packets<W: Write>(trace: &SimTrace, mut w: W) -> Result<()> {
    for p in trace.transmissions.iter().filter_map(|t| t.packet.as_ref()) {
        p.write_wire(&mut w)?;
    }
    Ok(())
}
