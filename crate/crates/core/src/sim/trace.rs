// SPDX-License-Identifier: Apache-2.0

//! Packet trace files: one packet per line as lowercase hex, `#` starts a
//! comment, blank lines are ignored.

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("trace line {line}: {message}")]
pub struct TraceError {
    pub line: usize,
    pub message: String,
}

pub fn parse_trace(text: &str) -> Result<Vec<Vec<u8>>, TraceError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bytes = hex::decode(line).map_err(|e| TraceError { line: i + 1, message: e.to_string() })?;
        out.push(bytes);
    }
    Ok(out)
}

pub fn format_trace(packets: &[Vec<u8>]) -> String {
    let mut s = String::new();
    for p in packets {
        s.push_str(&hex::encode(p));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_comments() {
        let pkts = vec![vec![0xde, 0xad], vec![1, 2, 3]];
        assert_eq!(parse_trace(&format_trace(&pkts)).unwrap(), pkts);
        let t = "# header\n\ndead # two bytes\n  0102\n";
        assert_eq!(parse_trace(t).unwrap(), vec![vec![0xde, 0xad], vec![1, 2]]);
        assert_eq!(parse_trace("abc\n").unwrap_err().line, 1);
    }
}
