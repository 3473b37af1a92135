//! Parser for rule library files.
//!
//! Grammar:
//!
//! ```text
//! library    := decl*
//! decl       := clause | function | constant | external
//! clause     := IDENT "(" [param ("," param)*] ")" "<=" "**" seg* "**" term
//! function   := IDENT "(" [param ("," param)*] ")" ":" type "=" term
//! constant   := "const" IDENT ":" type "=" term
//! external   := "external" IDENT "(" [param ("," param)*] ")" ":" type "=" STRING
//! param      := IDENT ":" type
//! type       := "bool" | "int" | "real" | "string" | "set" "<" type ">" | IDENT
//! seg        := STRING | term
//! domain     := "(" IDENT ":" type ")" | "(" IDENT "in" term ")"
//! term       := full operator grammar; "forall" domain "." term,
//!               "exists" domain "." term, "let" IDENT ":" type "=" term ";" term,
//!               "if" term "then" term "else" term,
//!               "{" [term ("," term)*] "}",
//!               "{" term "for" domain ["if" term] "}",
//!               IDENT ("::" IDENT)+   (a property name, denoting itself as a string)
//! ```
//!
//! Operator precedence, loosest first: `=>` (right associative), `or`,
//! `and`, `not`, comparisons, `+ -`, `* /`, unary minus. Quantifier, `let`,
//! and `if` bodies extend to the end of the enclosing term. Declarations
//! need no separator: a term never continues across an identifier that is
//! not `and`/`or`, and every declaration starts with one.

use super::ast::*;
use crate::lexer::{lex, ParseError, Token, TokenKind};
use crate::span::Span;

/// Words with structural meaning in rule files; rejected as identifiers.
pub const RESERVED: [&str; 16] = [
    "forall", "exists", "let", "and", "or", "not", "if", "then", "else", "for", "in", "const",
    "external", "true", "false", "set",
];

pub fn parse_library(source: &str) -> Result<Library, ParseError> {
    let tokens = lex(source)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut lib = Library::default();
    while p.peek() != &TokenKind::Eof {
        match p.peek() {
            TokenKind::Ident(w) if w == "const" => {
                let c = p.constant()?;
                lib.check_fresh(&c.name, "constant", c.span)?;
                lib.constants.insert(c.name.clone(), c);
            }
            TokenKind::Ident(w) if w == "external" => {
                let e = p.external()?;
                lib.check_fresh(&e.name, "external", e.span)?;
                lib.externals.insert(e.name.clone(), e);
            }
            TokenKind::Ident(_) => {
                let (name, span) = p.name("declaration name")?;
                let params = p.params()?;
                match p.peek() {
                    TokenKind::Le => {
                        p.bump();
                        let description = p.description()?;
                        let body = p.term_bp(0)?;
                        lib.check_fresh(&name, "claim", span)?;
                        lib.clauses.push(SClause {
                            name,
                            params,
                            description,
                            body,
                            span,
                        });
                    }
                    TokenKind::Colon => {
                        p.bump();
                        let ret = p.stype()?;
                        p.expect(TokenKind::Eq)?;
                        let body = p.term_bp(0)?;
                        lib.check_fresh(&name, "function", span)?;
                        lib.functions.insert(
                            name.clone(),
                            SFunction {
                                name,
                                params,
                                ret,
                                body,
                                span,
                            },
                        );
                    }
                    other => {
                        return Err(p.err_here(format!(
                            "expected `<=` (rule) or `:` (function) after the parameter list, found {other}"
                        )))
                    }
                }
            }
            other => {
                return Err(p.err_here(format!("expected a declaration, found {other}")));
            }
        }
    }
    Ok(lib)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.span(), message)
    }

    fn expect(&mut self, kind: TokenKind) -> Result<Span, ParseError> {
        if self.peek() == &kind {
            Ok(self.bump().span)
        } else {
            Err(self.err_here(format!("expected {kind}, found {}", self.peek())))
        }
    }

    fn at_word(&self, word: &str) -> bool {
        matches!(self.peek(), TokenKind::Ident(s) if s == word)
    }

    fn expect_word(&mut self, word: &str) -> Result<Span, ParseError> {
        if self.at_word(word) {
            Ok(self.bump().span)
        } else {
            Err(self.err_here(format!("expected `{word}`, found {}", self.peek())))
        }
    }

    fn name(&mut self, what: &str) -> Result<(String, Span), ParseError> {
        match self.peek().clone() {
            TokenKind::Ident(s) => {
                if RESERVED.contains(&s.as_str()) {
                    return Err(self.err_here(format!(
                        "`{s}` is a reserved word and cannot be used as a {what}"
                    )));
                }
                let span = self.bump().span;
                Ok((s, span))
            }
            other => Err(self.err_here(format!("expected {what}, found {other}"))),
        }
    }

    fn constant(&mut self) -> Result<SConstant, ParseError> {
        self.bump(); // const
        let (name, span) = self.name("constant name")?;
        self.expect(TokenKind::Colon)?;
        let ty = self.stype()?;
        self.expect(TokenKind::Eq)?;
        let value = self.term_bp(0)?;
        Ok(SConstant {
            name,
            ty,
            value,
            span,
        })
    }

    fn external(&mut self) -> Result<SExternal, ParseError> {
        self.bump(); // external
        let (name, span) = self.name("external name")?;
        let params = self.params()?;
        self.expect(TokenKind::Colon)?;
        let ret = self.stype()?;
        self.expect(TokenKind::Eq)?;
        let command = match self.peek().clone() {
            TokenKind::Str(s) => {
                self.bump();
                s
            }
            other => {
                return Err(self.err_here(format!(
                    "expected a command string for external `{name}`, found {other}"
                )))
            }
        };
        Ok(SExternal {
            name,
            params,
            ret,
            command,
            span,
        })
    }

    fn params(&mut self) -> Result<Vec<Param>, ParseError> {
        self.expect(TokenKind::LParen)?;
        let mut params = Vec::new();
        if self.peek() != &TokenKind::RParen {
            loop {
                let (name, span) = self.name("parameter name")?;
                if params.iter().any(|p: &Param| p.name == name) {
                    return Err(ParseError::new(
                        span,
                        format!("duplicate parameter `{name}`"),
                    ));
                }
                self.expect(TokenKind::Colon)?;
                let ty = self.stype()?;
                params.push(Param { name, ty, span });
                if self.peek() == &TokenKind::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen)?;
        Ok(params)
    }

    fn stype(&mut self) -> Result<SType, ParseError> {
        match self.peek().clone() {
            TokenKind::Ident(w) => match w.as_str() {
                "bool" => {
                    self.bump();
                    Ok(SType::Bool)
                }
                "int" => {
                    self.bump();
                    Ok(SType::Int)
                }
                "real" => {
                    self.bump();
                    Ok(SType::Real)
                }
                "string" => {
                    self.bump();
                    Ok(SType::String)
                }
                "set" => {
                    self.bump();
                    self.expect(TokenKind::Lt)?;
                    let elem = self.stype()?;
                    self.expect(TokenKind::Gt)?;
                    Ok(SType::Set(Box::new(elem)))
                }
                _ if RESERVED.contains(&w.as_str()) => {
                    Err(self.err_here(format!("`{w}` is not a type")))
                }
                _ => {
                    let span = self.bump().span;
                    Ok(SType::Named(w, span))
                }
            },
            other => Err(self.err_here(format!("expected a type, found {other}"))),
        }
    }

    /// `** seg* **` with segments strictly alternating between string
    /// literals and expressions.
    fn description(&mut self) -> Result<Vec<SSegment>, ParseError> {
        self.expect(TokenKind::StarStar)?;
        let mut segments: Vec<SSegment> = Vec::new();
        while self.peek() != &TokenKind::StarStar {
            let seg = match self.peek().clone() {
                TokenKind::Str(s) => {
                    self.bump();
                    SSegment::Text(s)
                }
                TokenKind::Eof => {
                    return Err(self.err_here("unterminated claim description: expected `**`"))
                }
                _ => SSegment::Expr(self.term_bp(0)?),
            };
            let same_kind = matches!(
                (segments.last(), &seg),
                (Some(SSegment::Text(_)), SSegment::Text(_))
                    | (Some(SSegment::Expr(_)), SSegment::Expr(_))
            );
            if same_kind {
                return Err(self.err_here(
                    "claim description segments must alternate between text and expressions",
                ));
            }
            segments.push(seg);
        }
        self.bump();
        Ok(segments)
    }

    fn domain(&mut self) -> Result<(String, SDomain), ParseError> {
        self.expect(TokenKind::LParen)?;
        let (var, _) = self.name("a variable")?;
        let domain = if self.at_word("in") {
            self.bump();
            SDomain::Set(Box::new(self.term_bp(0)?))
        } else {
            self.expect(TokenKind::Colon)?;
            SDomain::Type(self.stype()?)
        };
        self.expect(TokenKind::RParen)?;
        Ok((var, domain))
    }

    fn term_bp(&mut self, min_bp: u8) -> Result<STerm, ParseError> {
        let mut lhs = self.prefix()?;
        while let Some((op, lbp, rbp)) = self.peek_infix() {
            if lbp < min_bp {
                break;
            }
            let span = self.bump().span;
            let rhs = self.term_bp(rbp)?;
            lhs = STerm::Binop(op, Box::new(lhs), Box::new(rhs), span);
        }
        Ok(lhs)
    }

    fn peek_infix(&self) -> Option<(BinOp, u8, u8)> {
        let op = match self.peek() {
            TokenKind::Implies => (BinOp::Implies, 2, 1),
            TokenKind::Ident(w) if w == "or" => (BinOp::Or, 3, 4),
            TokenKind::Ident(w) if w == "and" => (BinOp::And, 5, 6),
            TokenKind::Eq => (BinOp::Eq, 9, 10),
            TokenKind::Ne => (BinOp::Ne, 9, 10),
            TokenKind::Lt => (BinOp::Lt, 9, 10),
            TokenKind::Le => (BinOp::Le, 9, 10),
            TokenKind::Gt => (BinOp::Gt, 9, 10),
            TokenKind::Ge => (BinOp::Ge, 9, 10),
            TokenKind::Plus => (BinOp::Add, 11, 12),
            TokenKind::Minus => (BinOp::Sub, 11, 12),
            TokenKind::Star => (BinOp::Mul, 13, 14),
            TokenKind::Slash => (BinOp::Div, 13, 14),
            _ => return None,
        };
        Some(op)
    }

    fn prefix(&mut self) -> Result<STerm, ParseError> {
        let span = self.span();
        match self.peek().clone() {
            TokenKind::Int(v) => {
                self.bump();
                Ok(STerm::Lit(Lit::Int(v), span))
            }
            TokenKind::Real(v) => {
                self.bump();
                Ok(STerm::Lit(Lit::Real(v), span))
            }
            TokenKind::Str(s) => {
                self.bump();
                Ok(STerm::Lit(Lit::Str(s), span))
            }
            TokenKind::Minus => {
                self.bump();
                let operand = self.term_bp(15)?;
                Ok(STerm::Neg(Box::new(operand), span))
            }
            TokenKind::LParen => {
                self.bump();
                let inner = self.term_bp(0)?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            TokenKind::LBrace => self.set_or_comprehension(span),
            TokenKind::Ident(w) => match w.as_str() {
                "true" | "false" => {
                    self.bump();
                    Ok(STerm::Lit(Lit::Bool(w == "true"), span))
                }
                "not" => {
                    self.bump();
                    let operand = self.term_bp(7)?;
                    Ok(STerm::Not(Box::new(operand), span))
                }
                "forall" | "exists" => {
                    self.bump();
                    let (var, domain) = self.domain()?;
                    self.expect(TokenKind::Dot)?;
                    let body = Box::new(self.term_bp(0)?);
                    Ok(if w == "forall" {
                        STerm::Forall(var, domain, body, span)
                    } else {
                        STerm::Exists(var, domain, body, span)
                    })
                }
                "let" => {
                    self.bump();
                    let (var, _) = self.name("a variable")?;
                    self.expect(TokenKind::Colon)?;
                    let ty = self.stype()?;
                    self.expect(TokenKind::Eq)?;
                    let value = Box::new(self.term_bp(0)?);
                    self.expect(TokenKind::Semi)?;
                    let body = Box::new(self.term_bp(0)?);
                    Ok(STerm::Let(var, ty, value, body, span))
                }
                "if" => {
                    self.bump();
                    let cond = Box::new(self.term_bp(0)?);
                    self.expect_word("then")?;
                    let then = Box::new(self.term_bp(0)?);
                    self.expect_word("else")?;
                    let els = Box::new(self.term_bp(0)?);
                    Ok(STerm::If(cond, then, els, span))
                }
                _ if RESERVED.contains(&w.as_str()) => Err(self.err_here(format!(
                    "`{w}` is a reserved word and cannot be used as an identifier"
                ))),
                _ => {
                    self.bump();
                    if self.peek() == &TokenKind::ColonColon {
                        // A `::`-qualified property name denotes itself.
                        let mut full = w;
                        while self.peek() == &TokenKind::ColonColon {
                            self.bump();
                            let (seg, _) = self.name("a property name after `::`")?;
                            full.push_str("::");
                            full.push_str(&seg);
                        }
                        return Ok(STerm::Lit(Lit::Str(full), span));
                    }
                    if self.peek() == &TokenKind::LParen {
                        self.bump();
                        let mut args = Vec::new();
                        if self.peek() != &TokenKind::RParen {
                            loop {
                                args.push(self.term_bp(0)?);
                                if self.peek() == &TokenKind::Comma {
                                    self.bump();
                                } else {
                                    break;
                                }
                            }
                        }
                        self.expect(TokenKind::RParen)?;
                        return Ok(STerm::Call(w, args, span));
                    }
                    Ok(STerm::Var(w, span))
                }
            },
            other => Err(self.err_here(format!("expected an expression, found {other}"))),
        }
    }

    fn set_or_comprehension(&mut self, span: Span) -> Result<STerm, ParseError> {
        self.bump(); // {
        if self.peek() == &TokenKind::RBrace {
            self.bump();
            return Ok(STerm::SetLit(Vec::new(), span));
        }
        let first = self.term_bp(0)?;
        if self.at_word("for") {
            self.bump();
            let (var, domain) = self.domain()?;
            let cond = if self.at_word("if") {
                self.bump();
                Some(Box::new(self.term_bp(0)?))
            } else {
                None
            };
            self.expect(TokenKind::RBrace)?;
            return Ok(STerm::Comprehension {
                head: Box::new(first),
                var,
                domain,
                cond,
                span,
            });
        }
        let mut items = vec![first];
        while self.peek() == &TokenKind::Comma {
            self.bump();
            items.push(self.term_bp(0)?);
        }
        self.expect(TokenKind::RBrace)?;
        Ok(STerm::SetLit(items, span))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX_RULES: &str = r#"
only_receive_decrypt(x : component) <=
  ** "The component " x " only receives messages that pass Decrypt" **
  forall (c : connection).
    (parent(destination(c)) = x) =>
      is_sensor_data(c) or only_receive_decrypt_connection(c)

only_receive_decrypt_connection(c : connection) <=
  ** "The connection " c " only carries messages that pass Decrypt" **
  let src : component = parent(source(c));
  unalterable_connection(c) and (is_decrypt(src) or only_receive_decrypt(src))
"#;

    #[test]
    fn two_recursive_rules_parse() {
        let lib = parse_library(EX_RULES).unwrap();
        assert_eq!(lib.clauses.len(), 2);
        let second = &lib.clauses[1];
        assert_eq!(second.name, "only_receive_decrypt_connection");
        match &second.body {
            STerm::Let(var, ty, value, _, _) => {
                assert_eq!(var, "src");
                assert!(matches!(ty, SType::Named(n, _) if n == "component"));
                match value.as_ref() {
                    STerm::Call(f, args, _) => {
                        assert_eq!(f, "parent");
                        assert!(matches!(&args[0], STerm::Call(g, _, _) if g == "source"));
                    }
                    other => panic!("expected parent(source(c)), got {other:?}"),
                }
            }
            other => panic!("expected let, got {other:?}"),
        }
    }

    #[test]
    fn forall_body_extends_over_implication() {
        let lib = parse_library(EX_RULES).unwrap();
        match &lib.clauses[0].body {
            STerm::Forall(var, SDomain::Type(ty), body, _) => {
                assert_eq!(var, "c");
                assert!(matches!(ty, SType::Named(n, _) if n == "connection"));
                assert!(matches!(
                    body.as_ref(),
                    STerm::Binop(BinOp::Implies, _, _, _)
                ));
            }
            other => panic!("expected forall, got {other:?}"),
        }
    }

    #[test]
    fn zero_arity_function() {
        let lib = parse_library("f() : int = 0").unwrap();
        let f = &lib.functions["f"];
        assert!(f.params.is_empty());
        assert_eq!(f.ret, SType::Int);
        assert!(matches!(&f.body, STerm::Lit(Lit::Int(0), _)));
    }

    const BOUND: &str = r#"
bound(logical : component, physical : component) : bool =
  memory_bound(logical, physical) or
  connection_bound(logical, physical) or
  processor_bound(logical, physical)

memory_bound(logical : component, physical : component) : bool =
  has_property(logical, Deployment_Properties::Actual_Memory_Binding) and
  member(physical, property(logical, Deployment_Properties::Actual_Memory_Binding))

connection_bound(logical : component, physical : component) : bool =
  has_property(logical, Deployment_Properties::Actual_Connection_Binding) and
  member(physical, property(logical, Deployment_Properties::Actual_Connection_Binding))

processor_bound(logical : component, physical : component) : bool =
  has_property(logical, Deployment_Properties::Actual_Processor_Binding) and
  member(physical, property(logical, Deployment_Properties::Actual_Processor_Binding))
"#;

    #[test]
    fn binding_functions_parse_with_signatures() {
        let lib = parse_library(BOUND).unwrap();
        assert_eq!(lib.functions.len(), 4);
        for f in lib.functions.values() {
            assert_eq!(f.params.len(), 2);
            assert_eq!(f.ret, SType::Bool);
            for p in &f.params {
                assert!(matches!(&p.ty, SType::Named(n, _) if n == "component"));
            }
        }
    }

    #[test]
    fn qualified_names_are_string_literals() {
        let lib = parse_library("f(x : component) : bool = has_property(x, A::B::C)").unwrap();
        match &lib.functions["f"].body {
            STerm::Call(_, args, _) => {
                assert_eq!(args[1], STerm::Lit(Lit::Str("A::B::C".into()), args[1].span()));
            }
            other => panic!("expected call, got {other:?}"),
        }
    }

    #[test]
    fn precedence_arithmetic_then_comparison_then_bool() {
        let lib = parse_library("f(x : int) : bool = x + 2 * 3 = 7 or x < 0 and not x = 1")
            .unwrap();
        // or(=(+(x, *(2,3)), 7), and(<(x,0), not(=(x,1))))
        match &lib.functions["f"].body {
            STerm::Binop(BinOp::Or, l, r, _) => {
                match l.as_ref() {
                    STerm::Binop(BinOp::Eq, add, _, _) => {
                        assert!(matches!(add.as_ref(), STerm::Binop(BinOp::Add, _, m, _)
                            if matches!(m.as_ref(), STerm::Binop(BinOp::Mul, _, _, _))));
                    }
                    other => panic!("expected =, got {other:?}"),
                }
                match r.as_ref() {
                    STerm::Binop(BinOp::And, lt, notx, _) => {
                        assert!(matches!(lt.as_ref(), STerm::Binop(BinOp::Lt, _, _, _)));
                        assert!(matches!(notx.as_ref(), STerm::Not(inner, _)
                            if matches!(inner.as_ref(), STerm::Binop(BinOp::Eq, _, _, _))));
                    }
                    other => panic!("expected and, got {other:?}"),
                }
            }
            other => panic!("expected or, got {other:?}"),
        }
    }

    #[test]
    fn implies_is_right_associative_and_loosest() {
        let lib = parse_library("c() <= ** ** a() => b() => d()").unwrap();
        match &lib.clauses[0].body {
            STerm::Binop(BinOp::Implies, _, r, _) => {
                assert!(matches!(r.as_ref(), STerm::Binop(BinOp::Implies, _, _, _)));
            }
            other => panic!("expected =>, got {other:?}"),
        }
    }

    #[test]
    fn message_delay_comprehension_parses() {
        let src = "message_delay(p : process) : int =
                     sum({thread_message_delay(t) for (t : thread) if bound(t, p)})";
        let lib = parse_library(src).unwrap();
        match &lib.functions["message_delay"].body {
            STerm::Call(f, args, _) => {
                assert_eq!(f, "sum");
                match &args[0] {
                    STerm::Comprehension {
                        var, cond, domain, ..
                    } => {
                        assert_eq!(var, "t");
                        assert!(cond.is_some());
                        assert!(matches!(domain, SDomain::Type(SType::Named(n, _)) if n == "thread"));
                    }
                    other => panic!("expected comprehension, got {other:?}"),
                }
            }
            other => panic!("expected sum call, got {other:?}"),
        }
    }

    #[test]
    fn set_domain_quantifier_parses() {
        let lib = parse_library("c(s : set<int>) <= ** ** forall (x in s). x > 0").unwrap();
        match &lib.clauses[0].body {
            STerm::Forall(_, SDomain::Set(_), _, _) => {}
            other => panic!("expected set-domain forall, got {other:?}"),
        }
    }

    #[test]
    fn external_declaration_parses() {
        let lib = parse_library("external sched_ok(s : system) : bool = \"true-cmd\"").unwrap();
        let e = &lib.externals["sched_ok"];
        assert_eq!(e.command, "true-cmd");
        assert_eq!(e.ret, SType::Bool);
    }

    #[test]
    fn reserved_words_rejected_as_identifiers() {
        for src in [
            "forall(x : int) : int = 1",
            "f(and : int) : int = 1",
            "const let : int = 1",
            "f(x : int) : int = exists",
        ] {
            let err = parse_library(src).unwrap_err();
            assert!(
                err.message.contains("reserved") || err.message.contains("expected"),
                "{src}: {}",
                err.message
            );
        }
    }

    #[test]
    fn name_cannot_span_categories() {
        let err = parse_library("f() : int = 0  f(x : int) <= ** ** true").unwrap_err();
        assert!(err.message.contains("already defined as a function"));
        let err = parse_library("c() <= ** ** true  c() : int = 0").unwrap_err();
        assert!(err.message.contains("already defined as a claim"));
    }

    #[test]
    fn merge_appends_clauses_in_order() {
        let a = parse_library("c(x : int) <= ** ** x = 1").unwrap();
        let b = parse_library("c(x : int) <= ** ** x = 2\nd() <= ** ** true").unwrap();
        let merged = a.merge(b).unwrap();
        assert_eq!(merged.clauses.len(), 3);
        assert_eq!(merged.clauses[0].name, "c");
        assert_eq!(merged.clauses[1].name, "c");
        assert_eq!(merged.clauses[2].name, "d");
    }

    #[test]
    fn merge_rejects_cross_category_collision() {
        let a = parse_library("f() : int = 0").unwrap();
        let b = parse_library("f() <= ** ** true").unwrap();
        assert!(a.merge(b).is_err());
    }

    #[test]
    fn description_interleaves_text_and_expressions() {
        let lib = parse_library(
            "c(x : component, n : int) <= ** \"part \" x \" waits \" n + 1 \" ticks\" ** true",
        )
        .unwrap();
        let segs = &lib.clauses[0].description;
        assert_eq!(segs.len(), 5);
        assert!(matches!(&segs[0], SSegment::Text(t) if t == "part "));
        assert!(matches!(&segs[3], SSegment::Expr(STerm::Binop(BinOp::Add, _, _, _))));
    }

    #[test]
    fn adjacent_text_segments_rejected() {
        let err = parse_library("c() <= ** \"a\" \"b\" ** true").unwrap_err();
        assert!(err.message.contains("alternate"));
    }

    #[test]
    fn negated_claim_application_still_parses() {
        // Stratification (rejecting `not` over a claim) is enforced by the
        // typechecker, which knows which names are claims.
        let lib = parse_library("c(x : component) <= ** ** not my_claim(x)").unwrap();
        assert!(matches!(&lib.clauses[0].body, STerm::Not(_, _)));
    }
}
