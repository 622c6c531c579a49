//! Trace files: whitespace-separated `name` or `name@time` tokens.

use compcap_core::TraceToken;

use crate::error::CliError;

pub fn parse_trace(text: &str) -> Result<Vec<TraceToken>, CliError> {
    let mut tokens = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        for word in line.split_whitespace() {
            let token = TraceToken::parse(word)
                .map_err(|e| CliError::Input(format!("line {}: token {word:?}: {e}", line_no + 1)))?;
            tokens.push(token);
        }
    }
    Ok(tokens)
}
