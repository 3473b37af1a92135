//! Architecture model instances and structural queries.
//!
//! A model is a tree of components (systems, processes, threads, hardware)
//! with ports, connections between ports, property associations, and
//! embedded `resolute { prove ... }` annex blocks. Instances are immutable
//! after parsing; every enumeration the engine performs over them follows
//! document order, which is what makes proof search deterministic.

mod parse;

pub use parse::parse_model;

use crate::lexer::quote;
use crate::span::Span;
use indexmap::IndexMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComponentId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConnectionId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComponentKind {
    System,
    Process,
    Thread,
    Processor,
    Memory,
    Bus,
    Device,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 7] = [
        ComponentKind::System,
        ComponentKind::Process,
        ComponentKind::Thread,
        ComponentKind::Processor,
        ComponentKind::Memory,
        ComponentKind::Bus,
        ComponentKind::Device,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ComponentKind::System => "system",
            ComponentKind::Process => "process",
            ComponentKind::Thread => "thread",
            ComponentKind::Processor => "processor",
            ComponentKind::Memory => "memory",
            ComponentKind::Bus => "bus",
            ComponentKind::Device => "device",
        }
    }

    pub fn from_str(s: &str) -> Option<ComponentKind> {
        Self::ALL.iter().copied().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    In,
    Out,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::In => "in",
            Direction::Out => "out",
        }
    }
}

/// One item in a component body, in declaration order. Rendering walks this
/// list so a parse/render round trip preserves the original layout.
#[derive(Debug, Clone, PartialEq)]
pub enum BodyItem {
    Sub(ComponentId),
    Port(FeatureId),
    Conn(ConnectionId),
    Prop(String),
    /// One `resolute { ... }` block; indices into `prove_directives`.
    Annex(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub name: String,
    pub kind: ComponentKind,
    pub parent: Option<ComponentId>,
    pub subcomponents: Vec<ComponentId>,
    pub features: Vec<FeatureId>,
    pub properties: IndexMap<String, PropertyValue>,
    pub body: Vec<BodyItem>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub name: String,
    pub direction: Direction,
    pub owner: ComponentId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub name: String,
    pub source: FeatureId,
    pub destination: FeatureId,
    pub properties: IndexMap<String, PropertyValue>,
    /// Component whose body declares the connection; defines its qualified
    /// name and how endpoint paths are rendered.
    pub declared_in: ComponentId,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PropertyValue {
    Str(String),
    Int(i64),
    Real(f64),
    Bool(bool),
    Ref(ComponentId),
    List(Vec<PropertyValue>),
}

/// Argument of a prove directive as written in the annex block. Paths are
/// resolved against the enclosing component once the rule library is known.
#[derive(Debug, Clone, PartialEq)]
pub enum ProveArg {
    Path(String),
    Str(String),
    Int(i64),
    Real(f64),
    Bool(bool),
}

impl fmt::Display for ProveArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProveArg::Path(p) => f.write_str(p),
            ProveArg::Str(s) => f.write_str(&quote(s)),
            ProveArg::Int(v) => write!(f, "{v}"),
            ProveArg::Real(v) => f.write_str(&render_real(*v)),
            ProveArg::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProveDirective {
    pub component: ComponentId,
    pub claim: String,
    pub args: Vec<ProveArg>,
    pub span: Span,
}

impl ProveDirective {
    /// Source form of the claim application, e.g. `only_receive_decrypt(MC)`.
    pub fn application_text(&self) -> String {
        let args: Vec<String> = self.args.iter().map(|a| a.to_string()).collect();
        format!("{}({})", self.claim, args.join(", "))
    }
}

/// A reference into the model, as produced by queries and consumed by the
/// evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementRef {
    Component(ComponentId),
    Connection(ConnectionId),
    Feature(FeatureId),
}

/// Quantifier domain selector: a concrete kind, any component, or any
/// connection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceFilter {
    AnyComponent,
    Kind(ComponentKind),
    Connection,
}

#[derive(Debug, Clone, Error, PartialEq)]
#[error("cannot resolve `{segment}` in `{path}`: nothing named `{segment}` in component {context}")]
pub struct ResolveError {
    pub path: String,
    pub segment: String,
    /// Qualified name of the component in which the lookup failed.
    pub context: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelInstance {
    pub root: ComponentId,
    pub components: Vec<Component>,
    pub features: Vec<Feature>,
    pub connections: Vec<Connection>,
    pub prove_directives: Vec<ProveDirective>,
}

impl ModelInstance {
    pub fn component(&self, id: ComponentId) -> &Component {
        &self.components[id.0 as usize]
    }

    pub fn feature(&self, id: FeatureId) -> &Feature {
        &self.features[id.0 as usize]
    }

    pub fn connection(&self, id: ConnectionId) -> &Connection {
        &self.connections[id.0 as usize]
    }

    /// Dot-joined path from the root down to `id`, root name included.
    pub fn qualified_name(&self, id: ComponentId) -> String {
        let mut parts = Vec::new();
        let mut cur = Some(id);
        while let Some(c) = cur {
            let comp = self.component(c);
            parts.push(comp.name.as_str());
            cur = comp.parent;
        }
        parts.reverse();
        parts.join(".")
    }

    pub fn feature_qualified_name(&self, id: FeatureId) -> String {
        let ft = self.feature(id);
        format!("{}.{}", self.qualified_name(ft.owner), ft.name)
    }

    pub fn connection_qualified_name(&self, id: ConnectionId) -> String {
        let cn = self.connection(id);
        format!("{}.{}", self.qualified_name(cn.declared_in), cn.name)
    }

    pub fn element_qualified_name(&self, r: ElementRef) -> String {
        match r {
            ElementRef::Component(id) => self.qualified_name(id),
            ElementRef::Connection(id) => self.connection_qualified_name(id),
            ElementRef::Feature(id) => self.feature_qualified_name(id),
        }
    }

    /// All instances matched by the filter, in document order.
    pub fn instances_of(&self, filter: InstanceFilter) -> Vec<ElementRef> {
        match filter {
            InstanceFilter::Connection => (0..self.connections.len())
                .map(|i| ElementRef::Connection(ConnectionId(i as u32)))
                .collect(),
            InstanceFilter::AnyComponent => (0..self.components.len())
                .map(|i| ElementRef::Component(ComponentId(i as u32)))
                .collect(),
            InstanceFilter::Kind(k) => (0..self.components.len())
                .map(|i| ComponentId(i as u32))
                .filter(|id| self.component(*id).kind == k)
                .map(ElementRef::Component)
                .collect(),
        }
    }

    /// Resolve a dotted path relative to `context`. The first segment is
    /// either the keyword `this` or a subcomponent of `context`; later
    /// segments descend through subcomponents; the final segment may name a
    /// feature of the component reached so far.
    pub fn resolve_reference(
        &self,
        context: ComponentId,
        path: &str,
    ) -> Result<ElementRef, ResolveError> {
        let segments: Vec<&str> = path.split('.').collect();
        let mut cur = context;
        for (i, seg) in segments.iter().enumerate() {
            if i == 0 && *seg == "this" {
                continue;
            }
            let comp = self.component(cur);
            if let Some(&sub) = comp
                .subcomponents
                .iter()
                .find(|&&s| self.component(s).name == *seg)
            {
                cur = sub;
                continue;
            }
            let last = i == segments.len() - 1;
            if last {
                if let Some(&ft) = comp
                    .features
                    .iter()
                    .find(|&&f| self.feature(f).name == *seg)
                {
                    return Ok(ElementRef::Feature(ft));
                }
            }
            return Err(ResolveError {
                path: path.to_string(),
                segment: seg.to_string(),
                context: self.qualified_name(cur),
            });
        }
        Ok(ElementRef::Component(cur))
    }

    /// Path from `ancestor` (exclusive) down to `target` as dotted names, or
    /// None when `target` is not a descendant-or-self of `ancestor`. An empty
    /// string means `target == ancestor`.
    fn path_from(&self, ancestor: ComponentId, target: ComponentId) -> Option<String> {
        let mut parts = Vec::new();
        let mut cur = target;
        while cur != ancestor {
            let comp = self.component(cur);
            parts.push(comp.name.as_str());
            cur = comp.parent?;
        }
        parts.reverse();
        Some(parts.join("."))
    }

    /// Pretty-print the instance back to model syntax. Parsing the result
    /// yields a structurally identical instance.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_component(self.root, 0, &mut out);
        out
    }

    fn render_component(&self, id: ComponentId, depth: usize, out: &mut String) {
        let comp = self.component(id);
        let pad = "  ".repeat(depth);
        out.push_str(&format!("{pad}{} {} {{\n", comp.kind.as_str(), comp.name));
        for item in &comp.body {
            match item {
                BodyItem::Sub(sub) => self.render_component(*sub, depth + 1, out),
                BodyItem::Port(ft) => {
                    let f = self.feature(*ft);
                    out.push_str(&format!(
                        "{pad}  {} port {}\n",
                        f.direction.as_str(),
                        f.name
                    ));
                }
                BodyItem::Conn(cn) => self.render_connection(*cn, depth + 1, out),
                BodyItem::Prop(key) => {
                    let value = &comp.properties[key];
                    out.push_str(&format!(
                        "{pad}  property {key} = {}\n",
                        self.render_property_value(value)
                    ));
                }
                BodyItem::Annex(directives) => {
                    out.push_str(&format!("{pad}  resolute {{\n"));
                    for &d in directives {
                        let dir = &self.prove_directives[d];
                        out.push_str(&format!("{pad}    prove {}\n", dir.application_text()));
                    }
                    out.push_str(&format!("{pad}  }}\n"));
                }
            }
        }
        out.push_str(&format!("{pad}}}\n"));
    }

    fn render_connection(&self, id: ConnectionId, depth: usize, out: &mut String) {
        let conn = self.connection(id);
        let pad = "  ".repeat(depth);
        out.push_str(&format!(
            "{pad}connection {} : {} -> {}",
            conn.name,
            self.endpoint_path(conn.declared_in, conn.source),
            self.endpoint_path(conn.declared_in, conn.destination)
        ));
        if conn.properties.is_empty() {
            out.push('\n');
        } else {
            out.push_str(" {\n");
            for (key, value) in &conn.properties {
                out.push_str(&format!(
                    "{pad}  property {key} = {}\n",
                    self.render_property_value(value)
                ));
            }
            out.push_str(&format!("{pad}}}\n"));
        }
    }

    fn endpoint_path(&self, declared_in: ComponentId, feature: FeatureId) -> String {
        let ft = self.feature(feature);
        if ft.owner == declared_in {
            return format!("this.{}", ft.name);
        }
        let prefix = self
            .path_from(declared_in, ft.owner)
            .expect("connection endpoint owner is a descendant of the declaring component");
        format!("{prefix}.{}", ft.name)
    }

    fn render_property_value(&self, value: &PropertyValue) -> String {
        match value {
            PropertyValue::Str(s) => quote(s),
            PropertyValue::Int(v) => v.to_string(),
            PropertyValue::Real(v) => render_real(*v),
            PropertyValue::Bool(b) => b.to_string(),
            PropertyValue::Ref(id) => {
                if *id == self.root {
                    "ref this".to_string()
                } else {
                    let path = self
                        .path_from(self.root, *id)
                        .expect("ref targets live in the instance tree");
                    format!("ref {path}")
                }
            }
            PropertyValue::List(items) => {
                let rendered: Vec<String> =
                    items.iter().map(|v| self.render_property_value(v)).collect();
                format!("[{}]", rendered.join(", "))
            }
        }
    }
}

/// Format a real so it re-lexes as a real literal (a decimal point is always
/// present).
pub fn render_real(v: f64) -> String {
    if v.fract() == 0.0 && v.is_finite() {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NESTED: &str = "
system Sys {
  system A {
    system B {
      in port p
    }
  }
}
";

    #[test]
    fn resolve_through_levels_to_feature() {
        let m = parse_model(NESTED).unwrap();
        let got = m.resolve_reference(m.root, "A.B.p").unwrap();
        match got {
            ElementRef::Feature(f) => {
                assert_eq!(m.feature_qualified_name(f), "Sys.A.B.p");
            }
            other => panic!("expected feature, got {other:?}"),
        }
    }

    #[test]
    fn resolve_this_is_identity() {
        let m = parse_model(NESTED).unwrap();
        let a = match m.resolve_reference(m.root, "A").unwrap() {
            ElementRef::Component(c) => c,
            other => panic!("expected component, got {other:?}"),
        };
        assert_eq!(m.resolve_reference(a, "this"), Ok(ElementRef::Component(a)));
        assert_eq!(
            m.resolve_reference(a, "this.B"),
            m.resolve_reference(a, "B")
        );
    }

    #[test]
    fn resolve_error_names_failing_segment() {
        let m = parse_model(NESTED).unwrap();
        let err = m.resolve_reference(m.root, "A.missing.p").unwrap_err();
        assert_eq!(err.segment, "missing");
        assert_eq!(err.path, "A.missing.p");
        assert_eq!(err.context, "Sys.A");
    }

    #[test]
    fn instances_of_filters_by_kind_in_document_order() {
        let m = parse_model(
            "system S {
               thread T1 { }
               process P {
                 thread T2 { }
               }
               thread T3 { }
             }",
        )
        .unwrap();
        let threads = m.instances_of(InstanceFilter::Kind(ComponentKind::Thread));
        let names: Vec<String> = threads
            .iter()
            .map(|r| m.element_qualified_name(*r))
            .collect();
        assert_eq!(names, ["S.T1", "S.P.T2", "S.T3"]);
        assert_eq!(
            m.instances_of(InstanceFilter::Kind(ComponentKind::Memory)),
            vec![]
        );
        assert_eq!(m.instances_of(InstanceFilter::AnyComponent).len(), 5);
    }

    #[test]
    fn instances_of_is_stable() {
        let m = parse_model(NESTED).unwrap();
        assert_eq!(
            m.instances_of(InstanceFilter::AnyComponent),
            m.instances_of(InstanceFilter::AnyComponent)
        );
    }

    #[test]
    fn real_rendering_keeps_the_point() {
        assert_eq!(render_real(5.0), "5.0");
        assert_eq!(render_real(0.25), "0.25");
        assert_eq!(render_real(-2.0), "-2.0");
    }
}
