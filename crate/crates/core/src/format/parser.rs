//! Line-oriented recursive-descent parser for the `.kb` text format.

use std::sync::Arc;

use num_rational::Ratio;

use crate::diagnostic::{Code, Diagnostic, SourceSpan};
use crate::model::{Interval, KbBuilder, KnowledgeBase, Options, Rational, Relation};

/// Result of parsing: the accepted part of the KB and every diagnostic met.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub kb: KnowledgeBase,
    pub diagnostics: Vec<Diagnostic>,
}

impl Parsed {
    pub fn has_parse_errors(&self) -> bool {
        self.diagnostics.iter().any(|d| d.code == Code::ParseError)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Stmt {
    Option(String),
    Class { name: String, determinable: Option<String> },
    Entity { id: String, category: String, label: Option<String> },
    Interval { id: String, start: Rational, end: Rational },
    Fact { relation: Relation, args: Vec<String> },
}

impl Stmt {
    fn pass(&self) -> u8 {
        match self {
            Stmt::Option(_) => 0,
            Stmt::Class { .. } | Stmt::Entity { .. } => 1,
            Stmt::Interval { .. } => 2,
            Stmt::Fact { .. } => 3,
        }
    }
}

pub fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || "_-.'′°@+".contains(c)
}

struct Cursor<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    line: &'a str,
    file: &'a Arc<str>,
    lineno: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl<'a> Cursor<'a> {
    fn new(line: &'a str, file: &'a Arc<str>, lineno: usize) -> Self {
        Cursor { chars: line.char_indices().collect(), pos: 0, line, file, lineno }
    }

    fn col(&self) -> usize {
        self.pos + 1
    }

    fn span(&self, start_col: usize, end_col: usize) -> SourceSpan {
        SourceSpan {
            file: self.file.clone(),
            line: self.lineno,
            col_start: start_col,
            col_end: end_col.max(start_col + 1),
        }
    }

    fn error(&self, start_col: usize, msg: impl Into<String>) -> Diagnostic {
        let end = if self.pos < self.chars.len() { self.col() + 1 } else { self.col() };
        Diagnostic::new(Code::ParseError, vec![], msg).with_span(Some(self.span(start_col, end)))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.peek().is_none()
    }

    fn expect(&mut self, c: char) -> PResult<()> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            let found = self.peek().map_or("end of line".to_string(), |f| format!("`{f}`"));
            Err(self.error(self.col(), format!("expected `{c}`, found {found}")))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn slice(&self, from: usize, to: usize) -> &'a str {
        let start = self.chars.get(from).map_or(self.line.len(), |&(b, _)| b);
        let end = self.chars.get(to).map_or(self.line.len(), |&(b, _)| b);
        &self.line[start..end]
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(is_ident_char) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error(self.col(), format!("expected {what}")));
        }
        Ok(self.slice(start, self.pos).to_string())
    }

    fn label(&mut self) -> PResult<String> {
        let start_col = self.col();
        self.expect('"')?;
        let start = self.pos;
        while self.peek().is_some_and(|c| c != '"') {
            self.pos += 1;
        }
        if self.peek().is_none() {
            return Err(self.error(start_col, "unterminated label"));
        }
        let s = self.slice(start, self.pos).to_string();
        self.pos += 1;
        Ok(s)
    }

    fn integer(&mut self) -> PResult<i64> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some('-') {
            self.pos += 1;
        }
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let text = self.slice(start, self.pos);
        text.parse().map_err(|_| self.error(start + 1, format!("expected an integer, found `{text}`")))
    }

    fn rational(&mut self) -> PResult<Rational> {
        self.skip_ws();
        let start_col = self.col();
        let num = self.integer()?;
        if self.peek() == Some('/') {
            self.pos += 1;
            let den = self.integer()?;
            if den == 0 {
                return Err(self.error(start_col, "zero denominator"));
            }
            Ok(Ratio::new(num, den))
        } else {
            Ok(Ratio::from_integer(num))
        }
    }

    fn args(&mut self) -> PResult<Vec<String>> {
        self.expect('(')?;
        let mut out = vec![self.ident("an identifier")?];
        while self.eat(',') {
            out.push(self.ident("an identifier")?);
        }
        self.expect(')')?;
        Ok(out)
    }

    fn end(&mut self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error(self.col(), "unexpected trailing input"))
        }
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let kw_col = {
            self.skip_ws();
            self.col()
        };
        let kw = self.ident("a statement keyword")?;
        let stmt = match kw.as_str() {
            "option" => Stmt::Option(self.ident("an option name")?),
            "class" => {
                let name = self.ident("a class name")?;
                let determinable = if self.at_end() {
                    None
                } else {
                    let kw2 = self.ident("`determinable-of`")?;
                    if kw2 != "determinable-of" {
                        return Err(self.error(kw_col, format!("expected `determinable-of`, found `{kw2}`")));
                    }
                    Some(self.ident("a class name")?)
                };
                Stmt::Class { name, determinable }
            }
            "entity" => {
                let id = self.ident("an entity id")?;
                self.expect(':')?;
                let category = self.ident("a category")?;
                let label = if self.at_end() { None } else { Some(self.label()?) };
                Stmt::Entity { id, category, label }
            }
            "interval" => {
                let id = self.ident("a temporal region id")?;
                self.expect('=')?;
                self.expect('[')?;
                let start = self.rational()?;
                self.expect(',')?;
                let end = self.rational()?;
                self.expect(']')?;
                Stmt::Interval { id, start, end }
            }
            "fact" => {
                let rel_col = {
                    self.skip_ws();
                    self.col()
                };
                let name = self.ident("a relation name")?;
                let relation = name
                    .parse::<Relation>()
                    .ok()
                    .filter(|r| !matches!(r, Relation::Eq | Relation::Neq))
                    .ok_or_else(|| self.error(rel_col, format!("unknown relation `{name}`")))?;
                Stmt::Fact { relation, args: self.args()? }
            }
            "eq" | "neq" => {
                let relation = if kw == "eq" { Relation::Eq } else { Relation::Neq };
                Stmt::Fact { relation, args: self.args()? }
            }
            other => return Err(self.error(kw_col, format!("unknown statement `{other}`"))),
        };
        self.end()?;
        Ok(stmt)
    }
}

/// Drops a `#` comment, ignoring `#` inside a quoted label.
fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

/// Parses a KB from text. Statements are applied in passes (options, then
/// classes and entities, then intervals, then facts) so forward references
/// are allowed. `extra` options are merged with those in the file.
pub fn parse(text: &str, file: &str, extra: Options) -> Parsed {
    let file: Arc<str> = Arc::from(file);
    let mut stmts: Vec<(Stmt, SourceSpan)> = Vec::new();
    let mut diagnostics = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        let mut cur = Cursor::new(line, &file, i + 1);
        match cur.statement() {
            Ok(stmt) => {
                let start = line.chars().take_while(|c| c.is_whitespace()).count() + 1;
                let end = line.trim_end().chars().count() + 1;
                stmts.push((stmt, cur.span(start, end)));
            }
            Err(d) => diagnostics.push(d),
        }
    }
    stmts.sort_by_key(|(s, _)| s.pass());

    let mut options = extra;
    for (s, span) in &stmts {
        if let Stmt::Option(flag) = s {
            if !options.set(flag) {
                diagnostics.push(
                    Diagnostic::new(Code::ParseError, vec![flag.clone()], format!("unknown option `{flag}`"))
                        .with_span(Some(span.clone())),
                );
            }
        }
    }

    let mut b = KbBuilder::new(options);
    for (s, span) in stmts {
        let span = Some(span);
        let res = match s {
            Stmt::Option(_) => Ok(()),
            Stmt::Class { name, determinable } => b.declare_class_spanned(&name, determinable.as_deref(), span),
            Stmt::Entity { id, category, label } => {
                b.add_entity_named(&id, &category, label.as_deref(), span).map(|_| ())
            }
            Stmt::Interval { id, start, end } => match Interval::new(start, end) {
                Some(x) => b.set_extent_spanned(&id, x, span),
                None => Err(Diagnostic::new(
                    Code::InvalidInterval,
                    vec![id.clone()],
                    format!("interval of `{id}` starts at {start} after it ends at {end}"),
                )
                .with_span(span)),
            },
            Stmt::Fact { relation, args } => b.assert_fact_spanned(relation, &args, span).map(|_| ()),
        };
        if let Err(d) = res {
            diagnostics.push(d);
        }
    }
    Parsed { kb: b.finish(), diagnostics }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str) -> Parsed {
        parse(text, "t.kb", Options::default())
    }

    #[test]
    fn empty_file() {
        let r = p("");
        assert!(r.kb.is_empty());
        assert!(r.diagnostics.is_empty());
    }

    #[test]
    fn statements() {
        let r = p(concat!(
            "# sphere\n",
            "option extended-simple\n",
            "class Hot determinable-of Temperature\n",
            "entity s1 : MaterialEntity \"sphere # one\"\n",
            "entity t1 : TemporalRegion\n",
            "entity temperature1 : Quality  # trailing\n",
            "interval t1 = [1/2, 3]\n",
            "fact INH(temperature1, s1)\n",
            "fact instanceOf(temperature1, Hot, t1)\n",
            "neq(s1, t1)\n",
        ));
        assert!(r.diagnostics.is_empty(), "{:?}", r.diagnostics);
        assert!(r.kb.options().extended_simple);
        assert_eq!(r.kb.entity(r.kb.lookup("s1").unwrap()).label.as_deref(), Some("sphere # one"));
        assert_eq!(r.kb.extent(r.kb.lookup("t1").unwrap()).unwrap().start, Ratio::new(1, 2));
        assert_eq!(r.kb.determinable_of("Hot"), Some("Temperature"));
        assert_eq!(r.kb.facts().len(), 3);
    }

    #[test]
    fn forward_reference() {
        let r = p("fact INH(q, x)\nentity q : Quality\nentity x : MaterialEntity\n");
        assert!(r.diagnostics.is_empty(), "{:?}", r.diagnostics);
    }

    #[test]
    fn wrong_arity_has_span() {
        let r = p("entity x : Process\nfact PSDC(x)\n");
        assert_eq!(r.diagnostics.len(), 1);
        let d = &r.diagnostics[0];
        assert_eq!(d.code, Code::ParseError);
        assert_eq!(d.span.as_ref().unwrap().line, 2);
    }

    #[test]
    fn syntax_errors() {
        for bad in [
            "entity x Process",
            "fact FOO(a)",
            "frobnicate",
            "interval t = [1, 2",
            "fact P(a b)",
            "interval t = [1/0, 2]",
        ] {
            let r = p(bad);
            assert_eq!(r.diagnostics.len(), 1, "{bad}");
            assert_eq!(r.diagnostics[0].code, Code::ParseError, "{bad}");
        }
    }

    #[test]
    fn reversed_interval() {
        let r = p("entity t : TemporalRegion\ninterval t = [3, 1]\n");
        assert_eq!(r.diagnostics[0].code, Code::InvalidInterval);
    }

    #[test]
    fn identifiers_with_primes() {
        let r = p("entity p′_move : Process\nentity temp_60°C : Quality\n");
        assert!(r.diagnostics.is_empty());
        assert!(r.kb.lookup("p′_move").is_some());
    }
}
