//! The built-in rule library loaded ahead of user libraries.
//!
//! `bound` answers whether a logical component is deployed onto a physical
//! one through any of the standard deployment binding properties.

/// Source text of the standard library. Callers parse and typecheck it like
/// any other library, then merge user libraries after it.
pub fn stdlib_source() -> &'static str {
    STDLIB
}

const STDLIB: &str = "\
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
";
