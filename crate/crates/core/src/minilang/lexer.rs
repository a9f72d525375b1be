use super::ast::Span;
use super::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Kw(&'static str),
    Punct(&'static str),
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Kw(k) => format!("`{k}`"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

const KEYWORDS: [&str; 10] = ["int", "bool", "void", "if", "else", "for", "while", "return", "true", "false"];

// Longest match first.
const PUNCT: [&str; 27] = [
    "++", "--", "<=", ">=", "==", "!=", "&&", "||", "(", ")", "{", "}", "[", "]", ";", ",", "=", "+", "-", "*", "/",
    "%", "<", ">", "!", "&", "|",
];

pub(crate) fn tokenize(src: &str) -> Result<Vec<(Tok, Span)>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            continue;
        }
        let span = Span { line, column: col };
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value = text
                .parse::<i64>()
                .ok()
                .filter(|v| *v <= i64::from(i32::MAX))
                .ok_or_else(|| SyntaxError::new(span, format!("integer literal `{text}` out of range")))?;
            out.push((Tok::Int(value), span));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            let text: String = chars[start..i].iter().collect();
            let tok = match KEYWORDS.iter().find(|k| **k == text) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(text),
            };
            out.push((tok, span));
            continue;
        }
        let matched = PUNCT.iter().find(|p| {
            let pc: Vec<char> = p.chars().collect();
            chars.len() >= i + pc.len() && chars[i..i + pc.len()] == pc[..]
        });
        match matched {
            Some(&"&") | Some(&"|") | None => {
                return Err(SyntaxError::new(span, format!("unexpected character `{c}`")));
            }
            Some(p) => {
                for _ in 0..p.len() {
                    {
                        let ch = chars[i];
                        advance(&mut i, &mut line, &mut col, ch);
                    }
                }
                out.push((Tok::Punct(p), span));
            }
        }
    }
    out.push((Tok::Eof, Span { line, column: col }));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_compound_operators() {
        let toks: Vec<Tok> = tokenize("a[j+1]++ <= -x && !b").unwrap().into_iter().map(|t| t.0).collect();
        assert_eq!(
            toks,
            vec![
                Tok::Ident("a".into()),
                Tok::Punct("["),
                Tok::Ident("j".into()),
                Tok::Punct("+"),
                Tok::Int(1),
                Tok::Punct("]"),
                Tok::Punct("++"),
                Tok::Punct("<="),
                Tok::Punct("-"),
                Tok::Ident("x".into()),
                Tok::Punct("&&"),
                Tok::Punct("!"),
                Tok::Ident("b".into()),
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn reports_position_of_bad_character() {
        let err = tokenize("int x;\n  $").unwrap_err();
        assert_eq!((err.line, err.column), (2, 3));
    }

    #[test]
    fn skips_line_comments() {
        let toks = tokenize("// hi\nx").unwrap();
        assert_eq!(toks[0].0, Tok::Ident("x".into()));
        assert_eq!(toks[0].1.line, 2);
    }
}
