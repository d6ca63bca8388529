use crate::error::{Error, Result};
use crate::tree::is_token_char;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Word(String),
    Punct(&'static str),
    Newline,
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub offset: usize,
}

const PUNCT: [&str; 12] = ["->", "<-", "(", ")", "|", "*", "+", "?", "{", "}", ";", ","];

/// Splits `text` into words and punctuation. `#` starts a comment running
/// to the end of the line. Newlines inside braces are dropped.
pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c == '\n' {
            chars.next();
            if depth == 0 {
                out.push(Token {
                    tok: Tok::Newline,
                    offset: i,
                });
            }
        } else if c.is_whitespace() {
            chars.next();
        } else if c == '#' {
            while chars.peek().is_some_and(|&(_, c)| c != '\n') {
                chars.next();
            }
        } else if let Some(p) = PUNCT.iter().find(|p| text[i..].starts_with(**p)) {
            for _ in 0..p.len() {
                chars.next();
            }
            match *p {
                "{" => depth += 1,
                "}" => depth = depth.saturating_sub(1),
                _ => {}
            }
            out.push(Token {
                tok: Tok::Punct(p),
                offset: i,
            });
        } else if is_token_char(c) {
            let mut end = i;
            while let Some(&(j, c)) = chars.peek() {
                if !is_token_char(c) || text[j..].starts_with("->") {
                    break;
                }
                end = j + c.len_utf8();
                chars.next();
            }
            out.push(Token {
                tok: Tok::Word(text[i..end].to_string()),
                offset: i,
            });
        } else {
            return Err(Error::syntax(text, i, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

/// Cursor over a token list with error reporting against the source text.
pub(crate) struct Cursor<'a> {
    pub text: &'a str,
    pub tokens: Vec<Token>,
    pub pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(text: &'a str) -> Result<Self> {
        Ok(Cursor {
            text,
            tokens: tokenize(text)?,
            pos: 0,
        })
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    pub fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|t| t.offset)
            .unwrap_or(self.text.len())
    }

    pub fn error(&self, message: impl Into<String>) -> Error {
        Error::syntax(self.text, self.offset(), message)
    }

    pub fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    pub fn at_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Tok::Punct(q)) if *q == p)
    }

    pub fn eat_punct(&mut self, p: &str) -> bool {
        if self.at_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_punct(&mut self, p: &str) -> Result<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{p}`")))
        }
    }

    pub fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(x)) if x == w)
    }

    pub fn word(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    pub fn at_line_end(&self) -> bool {
        matches!(self.peek(), None | Some(Tok::Newline))
    }

    pub fn end_line(&mut self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(Tok::Newline) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error("expected end of line")),
        }
    }

    pub fn skip_newlines(&mut self) {
        while matches!(self.peek(), Some(Tok::Newline)) {
            self.pos += 1;
        }
    }
}
