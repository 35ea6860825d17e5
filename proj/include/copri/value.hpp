#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "copri/diagnostics.hpp"

namespace copri {

class Value;
struct FieldSlot;

// One link of a complex reference. `hidden` is the implicit object handle a
// default continuation follows; concepts with a custom continue method keep
// their own bookkeeping in reference fields instead.
struct Segment {
  std::string concept_name;
  std::vector<FieldSlot> fields;
  std::optional<std::uint64_t> hidden;
};

// A (possibly complex) reference: a chain of segments ordered outermost to
// innermost, restricted to `context_name` ("" means unrestricted).
struct Ref {
  std::string context_name;
  std::vector<Segment> segments;
};

enum class ValueKind { Null, Void, Int, Double, Bool, Text, Reference, Handle, Map, Concept };

struct VoidTag {};
struct HandleTag { std::uint64_t id = 0; };
struct MapTag { std::uint64_t id = 0; };
struct ConceptTag { std::string name; };

class Value {
 public:
  Value() = default;
  static Value null() { return Value(); }
  static Value void_value() { return Value(VoidTag{}); }
  static Value of(std::int64_t v) { return Value(v); }
  static Value of(double v) { return Value(v); }
  static Value of(bool v) { return Value(v); }
  static Value of(std::string v) { return Value(std::move(v)); }
  static Value of(Ref v) { return Value(std::move(v)); }
  static Value handle(std::uint64_t id) { return Value(HandleTag{id}); }
  static Value map(std::uint64_t id) { return Value(MapTag{id}); }
  static Value concept_name(std::string name) { return Value(ConceptTag{std::move(name)}); }

  ValueKind kind() const { return static_cast<ValueKind>(data_.index()); }
  bool is_null() const { return kind() == ValueKind::Null; }
  bool is_void() const { return kind() == ValueKind::Void; }
  bool is_number() const { return kind() == ValueKind::Int || kind() == ValueKind::Double; }

  std::int64_t as_int() const { return std::get<std::int64_t>(data_); }
  double as_double() const { return std::get<double>(data_); }
  bool as_bool() const { return std::get<bool>(data_); }
  const std::string& as_text() const { return std::get<std::string>(data_); }
  const Ref& as_ref() const { return std::get<Ref>(data_); }
  Ref& as_ref() { return std::get<Ref>(data_); }
  std::uint64_t handle_id() const { return std::get<HandleTag>(data_).id; }
  std::uint64_t map_id() const { return std::get<MapTag>(data_).id; }
  const std::string& concept_value() const { return std::get<ConceptTag>(data_).name; }

  double number() const {
    return kind() == ValueKind::Int ? static_cast<double>(as_int()) : as_double();
  }

 private:
  using Storage = std::variant<std::monostate, VoidTag, std::int64_t, double, bool,
                               std::string, Ref, HandleTag, MapTag, ConceptTag>;
  explicit Value(Storage v) : data_(std::move(v)) {}
  Storage data_;
};

struct FieldSlot {
  std::string name;
  Value value;
};

inline bool value_equals(const Value& a, const Value& b);

inline bool reference_equals(const Ref& a, const Ref& b) {
  if (a.context_name != b.context_name) return false;
  if (a.segments.size() != b.segments.size()) return false;
  for (std::size_t i = 0; i < a.segments.size(); ++i) {
    const Segment& sa = a.segments[i];
    const Segment& sb = b.segments[i];
    if (sa.concept_name != sb.concept_name) return false;
    if (sa.hidden != sb.hidden) return false;
    if (sa.fields.size() != sb.fields.size()) return false;
    for (std::size_t f = 0; f < sa.fields.size(); ++f) {
      if (sa.fields[f].name != sb.fields[f].name) return false;
      if (!value_equals(sa.fields[f].value, sb.fields[f].value)) return false;
    }
  }
  return true;
}

// Total equality: null only equals null, numbers compare across int/double,
// everything else requires matching kinds.
inline bool value_equals(const Value& a, const Value& b) {
  if (a.is_null() || b.is_null()) return a.is_null() && b.is_null();
  if (a.is_number() && b.is_number()) return a.number() == b.number();
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case ValueKind::Void: return true;
    case ValueKind::Bool: return a.as_bool() == b.as_bool();
    case ValueKind::Text: return a.as_text() == b.as_text();
    case ValueKind::Reference: return reference_equals(a.as_ref(), b.as_ref());
    case ValueKind::Handle: return a.handle_id() == b.handle_id();
    case ValueKind::Map: return a.map_id() == b.map_id();
    case ValueKind::Concept: return a.concept_value() == b.concept_value();
    default: return false;
  }
}

inline const char* value_kind_name(ValueKind k) {
  switch (k) {
    case ValueKind::Null: return "null";
    case ValueKind::Void: return "void";
    case ValueKind::Int: return "int";
    case ValueKind::Double: return "double";
    case ValueKind::Bool: return "boolean";
    case ValueKind::Text: return "String";
    case ValueKind::Reference: return "reference";
    case ValueKind::Handle: return "Object";
    case ValueKind::Map: return "Map";
    case ValueKind::Concept: return "concept";
  }
  return "?";
}

}  // namespace copri
