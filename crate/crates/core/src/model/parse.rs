//! Parser for the architecture model language.
//!
//! Grammar:
//!
//! ```text
//! model      := component
//! component  := KIND IDENT "{" item* "}"
//! item       := component
//!             | ("in" | "out") "port" IDENT
//!             | "connection" IDENT ":" path "->" path [ "{" propitem* "}" ]
//!             | propitem
//!             | "resolute" "{" ("prove" IDENT "(" [arg ("," arg)*] ")")* "}"
//! propitem   := "property" PNAME "=" pvalue
//! pvalue     := STRING | ["-"] INT | ["-"] REAL | "true" | "false"
//!             | "ref" path | "[" [pvalue ("," pvalue)*] "]"
//! PNAME      := IDENT ("::" IDENT)*
//! path       := IDENT ("." IDENT)*
//! arg        := path | STRING | ["-"] INT | ["-"] REAL | "true" | "false"
//! ```
//!
//! Parsing proceeds in two phases: the tree, ports, and annex blocks are
//! built first; connection endpoints and `ref` property values are resolved
//! once the whole tree exists, since both may point forward in the document.

use super::*;
use crate::lexer::{lex, ParseError, Token, TokenKind};

/// Words with structural meaning; rejected as component, port, and
/// connection names so paths stay unambiguous.
const RESERVED: [&str; 18] = [
    "system",
    "process",
    "thread",
    "processor",
    "memory",
    "bus",
    "device",
    "in",
    "out",
    "port",
    "connection",
    "property",
    "resolute",
    "prove",
    "ref",
    "this",
    "true",
    "false",
];

/// Parse a complete model file: one top-level component.
pub fn parse_model(source: &str) -> Result<ModelInstance, ParseError> {
    let tokens = lex(source)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        components: Vec::new(),
        features: Vec::new(),
        raw_connections: Vec::new(),
        raw_properties: Vec::new(),
        prove_directives: Vec::new(),
    };
    let root = p.component(None)?;
    if p.peek() != &TokenKind::Eof {
        return Err(p.err_here(format!(
            "expected end of input after the top-level component, found {}",
            p.peek()
        )));
    }
    p.link(root)
}

struct RawConnection {
    name: String,
    declared_in: ComponentId,
    source: (String, Span),
    destination: (String, Span),
    properties: Vec<RawProperty>,
    span: Span,
}

struct RawProperty {
    key: String,
    value: RawValue,
    span: Span,
}

enum RawValue {
    Str(String),
    Int(i64),
    Real(f64),
    Bool(bool),
    RefPath(String, Span),
    List(Vec<RawValue>),
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    components: Vec<Component>,
    features: Vec<Feature>,
    raw_connections: Vec<RawConnection>,
    /// Per component, in document order.
    raw_properties: Vec<(ComponentId, RawProperty)>,
    prove_directives: Vec<ProveDirective>,
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

    fn ident(&mut self, what: &str) -> Result<(String, Span), ParseError> {
        match self.peek().clone() {
            TokenKind::Ident(s) => {
                let span = self.bump().span;
                Ok((s, span))
            }
            other => Err(self.err_here(format!("expected {what}, found {other}"))),
        }
    }

    fn name(&mut self, what: &str) -> Result<(String, Span), ParseError> {
        let (s, span) = self.ident(what)?;
        if RESERVED.contains(&s.as_str()) {
            return Err(ParseError::new(
                span,
                format!("`{s}` is a reserved word and cannot be used as a {what}"),
            ));
        }
        Ok((s, span))
    }

    fn kind_ahead(&self) -> Option<ComponentKind> {
        match self.peek() {
            TokenKind::Ident(s) => ComponentKind::from_str(s),
            _ => None,
        }
    }

    fn path(&mut self) -> Result<(String, Span), ParseError> {
        let (first, span) = self.ident("a name")?;
        let mut path = first;
        while self.peek() == &TokenKind::Dot {
            self.bump();
            let (seg, _) = self.ident("a name after `.`")?;
            path.push('.');
            path.push_str(&seg);
        }
        Ok((path, span))
    }

    fn component(&mut self, parent: Option<ComponentId>) -> Result<ComponentId, ParseError> {
        let kind = match self.kind_ahead() {
            Some(k) => {
                self.bump();
                k
            }
            None => {
                return Err(self.err_here(format!(
                    "expected a component kind (system, process, thread, processor, memory, bus, device), found {}",
                    self.peek()
                )))
            }
        };
        let (name, span) = self.name("component name")?;
        let id = ComponentId(self.components.len() as u32);
        self.components.push(Component {
            name,
            kind,
            parent,
            subcomponents: Vec::new(),
            features: Vec::new(),
            properties: IndexMap::new(),
            body: Vec::new(),
            span,
        });
        self.expect(TokenKind::LBrace)?;
        while self.peek() != &TokenKind::RBrace {
            let item = self.item(id)?;
            self.components[id.0 as usize].body.push(item);
        }
        self.expect(TokenKind::RBrace)?;
        Ok(id)
    }

    fn item(&mut self, owner: ComponentId) -> Result<BodyItem, ParseError> {
        if self.kind_ahead().is_some() {
            let sub_span = self.span();
            let sub = self.component(Some(owner))?;
            let name = self.components[sub.0 as usize].name.clone();
            self.check_fresh_name(owner, &name, sub_span)?;
            self.components[owner.0 as usize].subcomponents.push(sub);
            return Ok(BodyItem::Sub(sub));
        }
        if self.at_word("in") || self.at_word("out") {
            let direction = if self.at_word("in") {
                Direction::In
            } else {
                Direction::Out
            };
            self.bump();
            self.expect_word("port")?;
            let (name, span) = self.name("port name")?;
            self.check_fresh_name(owner, &name, span)?;
            let id = FeatureId(self.features.len() as u32);
            self.features.push(Feature {
                name,
                direction,
                owner,
            });
            self.components[owner.0 as usize].features.push(id);
            return Ok(BodyItem::Port(id));
        }
        if self.at_word("connection") {
            self.bump();
            let (name, span) = self.name("connection name")?;
            if self
                .raw_connections
                .iter()
                .any(|c| c.declared_in == owner && c.name == name)
            {
                return Err(ParseError::new(
                    span,
                    format!("duplicate connection name `{name}`"),
                ));
            }
            self.expect(TokenKind::Colon)?;
            let source = self.path()?;
            self.expect(TokenKind::Arrow)?;
            let destination = self.path()?;
            let mut properties: Vec<RawProperty> = Vec::new();
            if self.peek() == &TokenKind::LBrace {
                self.bump();
                while self.peek() != &TokenKind::RBrace {
                    self.expect_word("property")?;
                    let prop = self.property()?;
                    if properties.iter().any(|p| p.key == prop.key) {
                        return Err(ParseError::new(
                            prop.span,
                            format!("duplicate property `{}`", prop.key),
                        ));
                    }
                    properties.push(prop);
                }
                self.bump();
            }
            let id = ConnectionId(self.raw_connections.len() as u32);
            self.raw_connections.push(RawConnection {
                name,
                declared_in: owner,
                source,
                destination,
                properties,
                span,
            });
            return Ok(BodyItem::Conn(id));
        }
        if self.at_word("property") {
            self.bump();
            let prop = self.property()?;
            if self
                .raw_properties
                .iter()
                .any(|(c, p)| *c == owner && p.key == prop.key)
            {
                return Err(ParseError::new(
                    prop.span,
                    format!("duplicate property `{}`", prop.key),
                ));
            }
            let key = prop.key.clone();
            self.raw_properties.push((owner, prop));
            return Ok(BodyItem::Prop(key));
        }
        if self.at_word("resolute") {
            self.bump();
            self.expect(TokenKind::LBrace)?;
            let mut indices = Vec::new();
            while self.at_word("prove") {
                let span = self.bump().span;
                let (claim, _) = self.name("claim name")?;
                self.expect(TokenKind::LParen)?;
                let mut args = Vec::new();
                if self.peek() != &TokenKind::RParen {
                    loop {
                        args.push(self.prove_arg()?);
                        if self.peek() == &TokenKind::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(TokenKind::RParen)?;
                indices.push(self.prove_directives.len());
                self.prove_directives.push(ProveDirective {
                    component: owner,
                    claim,
                    args,
                    span,
                });
            }
            self.expect(TokenKind::RBrace)?;
            return Ok(BodyItem::Annex(indices));
        }
        Err(self.err_here(format!(
            "expected a subcomponent, port, connection, property, or resolute block, found {}",
            self.peek()
        )))
    }

    fn property(&mut self) -> Result<RawProperty, ParseError> {
        let (first, span) = self.ident("a property name")?;
        let mut key = first;
        while self.peek() == &TokenKind::ColonColon {
            self.bump();
            let (seg, _) = self.ident("a property name after `::`")?;
            key.push_str("::");
            key.push_str(&seg);
        }
        self.expect(TokenKind::Eq)?;
        let value = self.pvalue()?;
        Ok(RawProperty { key, value, span })
    }

    fn pvalue(&mut self) -> Result<RawValue, ParseError> {
        match self.peek().clone() {
            TokenKind::Str(s) => {
                self.bump();
                Ok(RawValue::Str(s))
            }
            TokenKind::Int(v) => {
                self.bump();
                Ok(RawValue::Int(v))
            }
            TokenKind::Real(v) => {
                self.bump();
                Ok(RawValue::Real(v))
            }
            TokenKind::Minus => {
                self.bump();
                match self.peek().clone() {
                    TokenKind::Int(v) => {
                        self.bump();
                        Ok(RawValue::Int(-v))
                    }
                    TokenKind::Real(v) => {
                        self.bump();
                        Ok(RawValue::Real(-v))
                    }
                    other => Err(self.err_here(format!(
                        "expected a number after `-`, found {other}"
                    ))),
                }
            }
            TokenKind::Ident(w) if w == "true" || w == "false" => {
                self.bump();
                Ok(RawValue::Bool(w == "true"))
            }
            TokenKind::Ident(w) if w == "ref" => {
                self.bump();
                let (path, span) = self.path()?;
                Ok(RawValue::RefPath(path, span))
            }
            TokenKind::LBracket => {
                self.bump();
                let mut items = Vec::new();
                if self.peek() != &TokenKind::RBracket {
                    loop {
                        items.push(self.pvalue()?);
                        if self.peek() == &TokenKind::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(TokenKind::RBracket)?;
                Ok(RawValue::List(items))
            }
            other => Err(self.err_here(format!("expected a property value, found {other}"))),
        }
    }

    fn prove_arg(&mut self) -> Result<ProveArg, ParseError> {
        match self.peek().clone() {
            TokenKind::Str(s) => {
                self.bump();
                Ok(ProveArg::Str(s))
            }
            TokenKind::Int(v) => {
                self.bump();
                Ok(ProveArg::Int(v))
            }
            TokenKind::Real(v) => {
                self.bump();
                Ok(ProveArg::Real(v))
            }
            TokenKind::Minus => {
                self.bump();
                match self.peek().clone() {
                    TokenKind::Int(v) => {
                        self.bump();
                        Ok(ProveArg::Int(-v))
                    }
                    TokenKind::Real(v) => {
                        self.bump();
                        Ok(ProveArg::Real(-v))
                    }
                    other => Err(self.err_here(format!(
                        "expected a number after `-`, found {other}"
                    ))),
                }
            }
            TokenKind::Ident(w) if w == "true" || w == "false" => {
                self.bump();
                Ok(ProveArg::Bool(w == "true"))
            }
            TokenKind::Ident(_) => {
                let (path, _) = self.path()?;
                Ok(ProveArg::Path(path))
            }
            other => Err(self.err_here(format!("expected a prove argument, found {other}"))),
        }
    }

    /// Name freshness across the resolution namespace of one component:
    /// subcomponents and ports share it so paths stay unambiguous.
    fn check_fresh_name(
        &self,
        owner: ComponentId,
        name: &str,
        span: Span,
    ) -> Result<(), ParseError> {
        let comp = &self.components[owner.0 as usize];
        let taken = comp
            .subcomponents
            .iter()
            .any(|&s| self.components[s.0 as usize].name == name)
            || comp
                .features
                .iter()
                .any(|&f| self.features[f.0 as usize].name == name);
        if taken {
            let mut path = Vec::new();
            let mut cur = Some(owner);
            while let Some(c) = cur {
                path.push(self.components[c.0 as usize].name.clone());
                cur = self.components[c.0 as usize].parent;
            }
            path.reverse();
            Err(ParseError::new(
                span,
                format!("duplicate name `{name}` in component `{}`", path.join(".")),
            ))
        } else {
            Ok(())
        }
    }

    /// Phase two: resolve connection endpoints and `ref` property paths, then
    /// assemble the final instance.
    fn link(mut self, root: ComponentId) -> Result<ModelInstance, ParseError> {
        let mut instance = ModelInstance {
            root,
            components: std::mem::take(&mut self.components),
            features: std::mem::take(&mut self.features),
            connections: Vec::new(),
            prove_directives: std::mem::take(&mut self.prove_directives),
        };
        for (owner, raw) in std::mem::take(&mut self.raw_properties) {
            let value = resolve_value(&instance, raw.value)?;
            check_homogeneous(&value, &raw.key, raw.span)?;
            instance.components[owner.0 as usize]
                .properties
                .insert(raw.key, value);
        }
        for raw in std::mem::take(&mut self.raw_connections) {
            let source = resolve_endpoint(&instance, raw.declared_in, &raw.source)?;
            let destination = resolve_endpoint(&instance, raw.declared_in, &raw.destination)?;
            if source == destination {
                return Err(ParseError::new(
                    raw.span,
                    format!(
                        "connection `{}` has identical source and destination `{}`",
                        raw.name,
                        instance.feature_qualified_name(source)
                    ),
                ));
            }
            let mut properties = IndexMap::new();
            for prop in raw.properties {
                let value = resolve_value(&instance, prop.value)?;
                check_homogeneous(&value, &prop.key, prop.span)?;
                properties.insert(prop.key, value);
            }
            instance.connections.push(Connection {
                name: raw.name,
                source,
                destination,
                properties,
                declared_in: raw.declared_in,
            });
        }
        Ok(instance)
    }
}

fn resolve_endpoint(
    instance: &ModelInstance,
    declared_in: ComponentId,
    (path, span): &(String, Span),
) -> Result<FeatureId, ParseError> {
    match instance.resolve_reference(declared_in, path) {
        Ok(ElementRef::Feature(f)) => Ok(f),
        Ok(_) => Err(ParseError::new(
            *span,
            format!("connection endpoint `{path}` must name a port"),
        )),
        Err(e) => Err(ParseError::new(*span, e.to_string())),
    }
}

fn resolve_value(instance: &ModelInstance, raw: RawValue) -> Result<PropertyValue, ParseError> {
    Ok(match raw {
        RawValue::Str(s) => PropertyValue::Str(s),
        RawValue::Int(v) => PropertyValue::Int(v),
        RawValue::Real(v) => PropertyValue::Real(v),
        RawValue::Bool(b) => PropertyValue::Bool(b),
        RawValue::RefPath(path, span) => {
            match instance.resolve_reference(instance.root, &path) {
                Ok(ElementRef::Component(c)) => PropertyValue::Ref(c),
                Ok(_) => {
                    return Err(ParseError::new(
                        span,
                        format!("property reference `{path}` must name a component"),
                    ))
                }
                Err(e) => return Err(ParseError::new(span, e.to_string())),
            }
        }
        RawValue::List(items) => PropertyValue::List(
            items
                .into_iter()
                .map(|v| resolve_value(instance, v))
                .collect::<Result<_, _>>()?,
        ),
    })
}

fn tag(value: &PropertyValue) -> &'static str {
    match value {
        PropertyValue::Str(_) => "string",
        PropertyValue::Int(_) => "integer",
        PropertyValue::Real(_) => "real",
        PropertyValue::Bool(_) => "boolean",
        PropertyValue::Ref(_) => "reference",
        PropertyValue::List(_) => "list",
    }
}

fn check_homogeneous(value: &PropertyValue, key: &str, span: Span) -> Result<(), ParseError> {
    if let PropertyValue::List(items) = value {
        for item in items {
            check_homogeneous(item, key, span)?;
        }
        if let Some(first) = items.first() {
            if let Some(odd) = items.iter().find(|i| tag(i) != tag(first)) {
                return Err(ParseError::new(
                    span,
                    format!(
                        "property `{key}` mixes {} and {} elements in one list",
                        tag(first),
                        tag(odd)
                    ),
                ));
            }
        }
    }
    Ok(())
}
