use std::io::{BufRead, Write};

use super::{OracleError, VerdictSource};
use crate::dag::VertexId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Token {
    Valid,
    Invalid,
    Quit,
}

/// Reads one answer token. `good`/`bad` are aliases.
pub fn parse_token(input: &str) -> Option<Token> {
    match input.trim().to_ascii_lowercase().as_str() {
        "valid" | "good" => Some(Token::Valid),
        "invalid" | "bad" => Some(Token::Invalid),
        "quit" | "q" | "exit" => Some(Token::Quit),
        _ => None,
    }
}

/// Asks a person for each verdict.
pub struct InteractiveSource<R, W> {
    input: R,
    output: W,
}

impl<R: BufRead, W: Write> InteractiveSource<R, W> {
    pub fn new(input: R, output: W) -> Self {
        InteractiveSource { input, output }
    }

    /// Prompts until a recognised token arrives. `quit` and end of input
    /// abort.
    pub fn ask(&mut self, id: &VertexId) -> Result<bool, OracleError> {
        loop {
            writeln!(self.output, "TEST {id}? [valid/invalid]")?;
            self.output.flush()?;
            let mut line = String::new();
            if self.input.read_line(&mut line)? == 0 {
                return Err(OracleError::Aborted);
            }
            match parse_token(&line) {
                Some(Token::Valid) => return Ok(true),
                Some(Token::Invalid) => return Ok(false),
                Some(Token::Quit) => return Err(OracleError::Aborted),
                None => writeln!(
                    self.output,
                    "unrecognised answer {:?}; type valid, invalid or quit",
                    line.trim()
                )?,
            }
        }
    }
}

impl<R: BufRead, W: Write> VerdictSource for InteractiveSource<R, W> {
    fn evaluate(&mut self, id: &VertexId) -> Result<bool, OracleError> {
        self.ask(id)
    }
}

#[cfg(test)]
mod tests {
    use std::io::Cursor;

    use super::*;

    #[test]
    fn aliases_and_reprompt() {
        let mut out = Vec::new();
        let mut src = InteractiveSource::new(Cursor::new("maybe\ngood\nbad\n"), &mut out);
        let id = VertexId::new("c1").unwrap();
        assert!(src.ask(&id).unwrap());
        assert!(!src.ask(&id).unwrap());
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.matches("TEST c1? [valid/invalid]").count(), 3);
    }

    #[test]
    fn eof_and_quit_abort() {
        let id = VertexId::new("c1").unwrap();
        let mut src = InteractiveSource::new(Cursor::new(""), Vec::new());
        assert!(matches!(src.ask(&id), Err(OracleError::Aborted)));
        let mut src = InteractiveSource::new(Cursor::new("quit\n"), Vec::new());
        assert!(matches!(src.ask(&id), Err(OracleError::Aborted)));
    }
}
