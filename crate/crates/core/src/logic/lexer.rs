use num_bigint::BigInt;

use super::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Num(BigInt),
    Ident(String),
    Str(String),
    Var,
    Parameter,
    In,
    Query,
    Real,
    Int,
    Semi,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Turnstile,
    Assign,
    EqEq,
    NotEq,
    Iff,
    Implies,
    Nand,
    Nor,
    Bang,
    Amp,
    Bar,
    Caret,
    Plus,
    Minus,
    Star,
    StarStar,
    Slash,
    Dollar,
    Question,
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

const PUNCT: &[(&str, Tok)] = &[
    ("<->", Tok::Iff),
    ("->", Tok::Implies),
    ("|-", Tok::Turnstile),
    (":=", Tok::Assign),
    ("==", Tok::EqEq),
    ("!=", Tok::NotEq),
    ("!&", Tok::Nand),
    ("!|", Tok::Nor),
    ("**", Tok::StarStar),
    ("!", Tok::Bang),
    ("&", Tok::Amp),
    ("|", Tok::Bar),
    ("^", Tok::Caret),
    ("+", Tok::Plus),
    ("-", Tok::Minus),
    ("*", Tok::Star),
    ("/", Tok::Slash),
    ("$", Tok::Dollar),
    ("?", Tok::Question),
    (";", Tok::Semi),
    (",", Tok::Comma),
    ("(", Tok::LParen),
    (")", Tok::RParen),
    ("{", Tok::LBrace),
    ("}", Tok::RBrace),
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
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
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token { tok: Tok::Num(digits.parse().expect("ascii digits")), pos });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = match word.as_str() {
                "var" => Tok::Var,
                "parameter" => Tok::Parameter,
                "in" => Tok::In,
                "query" => Tok::Query,
                "real" => Tok::Real,
                "int" => Tok::Int,
                _ => Tok::Ident(word),
            };
            out.push(Token { tok, pos });
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            i += 1;
            col += 1;
            loop {
                match chars.get(i) {
                    None | Some('\n') => return Err(SyntaxError::new(pos, "unterminated string")),
                    Some('"') => {
                        i += 1;
                        col += 1;
                        break;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                        col += 1;
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), pos });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match PUNCT.iter().find(|(p, _)| rest.starts_with(p)) {
            Some((p, tok)) => {
                i += p.len();
                col += p.len();
                out.push(Token { tok: tok.clone(), pos });
            }
            None => return Err(SyntaxError::new(pos, format!("unexpected character `{c}`"))),
        }
    }
    out.push(Token { tok: Tok::Eof, pos: Pos { line, col } });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn longest_match_punctuation() {
        assert_eq!(
            kinds("|- a <-> b -> !c;"),
            [
                Tok::Turnstile,
                Tok::Ident("a".into()),
                Tok::Iff,
                Tok::Ident("b".into()),
                Tok::Implies,
                Tok::Bang,
                Tok::Ident("c".into()),
                Tok::Semi,
                Tok::Eof
            ]
        );
        assert_eq!(kinds("x**2")[1], Tok::StarStar);
        assert_eq!(kinds("a !& b")[1], Tok::Nand);
    }

    #[test]
    fn comments_and_positions() {
        let toks = tokenize("// note\n  var x; // trailing\nquery x;").unwrap();
        assert_eq!(toks[0].tok, Tok::Var);
        assert_eq!(toks[0].pos, Pos { line: 2, col: 3 });
        assert_eq!(toks[3].pos, Pos { line: 3, col: 1 });
    }

    #[test]
    fn strings_and_errors() {
        assert_eq!(kinds("\"{0,1}\"")[0], Tok::Str("{0,1}".into()));
        assert!(tokenize("\"open").is_err());
        let err = tokenize("x @ y").unwrap_err();
        assert_eq!((err.line, err.col), (1, 3));
    }
}
