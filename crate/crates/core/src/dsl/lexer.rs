use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(String),
    /// `'name`: forces a name literal.
    Quoted(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Number(s) => write!(f, "`{s}`"),
            Tok::Quoted(s) => write!(f, "`'{s}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

/// Multi-character symbols first so that the longest match wins.
const SYMBOLS: &[&str] = &[
    "+-", "->", "<=", ">=", "!=", "==", "&&", "||", "{", "}", "(", ")", "[", "]", "<", ">", ";", ",", ":", "=", ".",
    "|", "\\", "^", "+", "-", "*", "/", "&", "!", "_",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexError {
    pub line: usize,
    pub col: usize,
    pub ch: char,
}

pub fn lex(src: &str) -> Result<Vec<Spanned>, LexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
        for k in 0..n {
            if chars[*i + k] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        }
        *i += n;
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        let is_word = |c: char| c.is_alphanumeric() || c == '_';
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                j += 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
            }
            let text: String = chars[i..j].iter().collect();
            let n = j - i;
            advance(&mut i, &mut line, &mut col, n);
            out.push(Spanned { tok: Tok::Number(text), line: start_line, col: start_col });
            continue;
        }
        if c.is_alphabetic() || (c == '_' && chars.get(i + 1).is_some_and(|&d| is_word(d))) {
            let mut j = i;
            while j < chars.len() && is_word(chars[j]) {
                j += 1;
            }
            let text: String = chars[i..j].iter().collect();
            let n = j - i;
            advance(&mut i, &mut line, &mut col, n);
            out.push(Spanned { tok: Tok::Ident(text), line: start_line, col: start_col });
            continue;
        }
        if c == '\'' {
            let mut j = i + 1;
            while j < chars.len() && is_word(chars[j]) {
                j += 1;
            }
            if j == i + 1 {
                return Err(LexError { line, col, ch: c });
            }
            let text: String = chars[i + 1..j].iter().collect();
            let n = j - i;
            advance(&mut i, &mut line, &mut col, n);
            out.push(Spanned { tok: Tok::Quoted(text), line: start_line, col: start_col });
            continue;
        }
        let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                advance(&mut i, &mut line, &mut col, s.chars().count());
                out.push(Spanned { tok: Tok::Sym(s), line: start_line, col: start_col });
            }
            None => return Err(LexError { line, col, ch: c }),
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}
