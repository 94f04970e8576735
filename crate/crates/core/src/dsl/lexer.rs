use super::{ParseError, ParseErrorKind, Pos};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Number(f64),
    Int(i64),
    Punct(char),
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(x) => format!("number {x}"),
            Tok::Int(i) => format!("number {i}"),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

const PUNCT: &str = "{}[](),;:+-*/^";

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        // line comment
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(s),
                pos,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut is_int = true;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                is_int = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    is_int = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            if i < chars.len() && (chars[i].is_ascii_alphabetic() || chars[i] == '_' || chars[i] == '.') {
                return Err(ParseError::new(
                    pos,
                    ParseErrorKind::BadNumber(format!("{s}{}", chars[i])),
                ));
            }
            let tok = if is_int {
                match s.parse::<i64>() {
                    Ok(v) => Tok::Int(v),
                    Err(_) => Tok::Number(s.parse().unwrap_or(f64::INFINITY)),
                }
            } else {
                Tok::Number(
                    s.parse()
                        .map_err(|_| ParseError::new(pos, ParseErrorKind::BadNumber(s.clone())))?,
                )
            };
            out.push(Token { tok, pos });
            continue;
        }
        if PUNCT.contains(c) {
            out.push(Token {
                tok: Tok::Punct(c),
                pos,
            });
            i += 1;
            col += 1;
            continue;
        }
        return Err(ParseError::new(pos, ParseErrorKind::UnexpectedChar(c)));
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, column: col },
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_track_lines() {
        let toks = tokenize("a\n  2.5e-1 ^").unwrap();
        assert_eq!(toks[1].tok, Tok::Number(0.25));
        assert_eq!(toks[1].pos, Pos { line: 2, column: 3 });
        assert_eq!(toks[2].pos, Pos { line: 2, column: 10 });
    }

    #[test]
    fn rejects_stray_characters() {
        let err = tokenize("cos(a) $").unwrap_err();
        assert_eq!(err.pos, Pos { line: 1, column: 8 });
        assert_eq!(err.kind, ParseErrorKind::UnexpectedChar('$'));
        assert!(tokenize("1.2.3").is_err());
        assert!(tokenize("3x").is_err());
    }
}
