#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "copri/concept_table.hpp"
#include "copri/context_stack.hpp"
#include "copri/value.hpp"

namespace copri {

inline const std::string& ref_real_concept(const Ref& r, int line = 0, int column = 0) {
  if (r.segments.empty())
    fail(ErrorKind::EmptyReference, "reference has no levels", line, column);
  return r.segments.back().concept_name;
}

inline const std::string& ref_real_context(const Ref& r) { return r.context_name; }

inline Value default_value_for(const TypeExpr& ty) {
  if (!ty.is_builtin) return Value::null();
  if (ty.name == "double") return Value::of(0.0);
  if (ty.name == "int") return Value::of(static_cast<std::int64_t>(0));
  if (ty.name == "boolean") return Value::of(false);
  if (ty.name == "String" || ty.name == "char") return Value::of(std::string());
  return Value::null();  // Object, Map
}

// Reference-class slots with type defaults; field initializers are applied
// separately by the evaluator where one is in play.
inline Segment default_segment(const ConceptTable& table, const std::string& cname) {
  Segment seg;
  seg.concept_name = cname;
  const ConceptDecl* decl = table.require(cname).decl;
  for (const FieldDecl& f : decl->ref_class.fields)
    seg.fields.push_back({f.name, default_value_for(f.type)});
  return seg;
}

// A full chain for `concept_name` restricted to `context` (one segment per
// inclusion level strictly below the context).
inline Ref build_default_ref(const ConceptTable& table, const std::string& context,
                             const std::string& concept_name, int line = 0,
                             int column = 0) {
  if (!table.is_included(concept_name, context))
    fail(ErrorKind::Cast,
         "'" + concept_name + "' is not included in '" +
             (context.empty() ? std::string(kRootName) : context) + "'",
         line, column);
  Ref out;
  out.context_name = table.is_root(context) ? "" : context;
  for (const std::string& c : table.lineage(concept_name))
    if (table.is_strictly_included(c, out.context_name))
      out.segments.push_back(default_segment(table, c));
  if (out.segments.empty())
    fail(ErrorKind::EmptyReference,
         "a reference to '" + concept_name + "' in its own context has no levels", line,
         column);
  return out;
}

inline bool is_well_formed_ref(const ConceptTable& table, const Ref& r) {
  if (r.segments.empty()) return false;
  std::string_view prev = r.context_name;
  for (const Segment& seg : r.segments) {
    if (!table.is_strictly_included(seg.concept_name, prev)) return false;
    prev = seg.concept_name;
  }
  return true;
}

// lhs : rhs for two references: the junction level of rhs (its context) must
// be exactly the innermost concept of lhs.
inline Ref ref_concat(const Ref& lhs, const Ref& rhs, int line = 0, int column = 0) {
  const std::string& junction = ref_real_concept(lhs, line, column);
  if (rhs.segments.empty())
    fail(ErrorKind::EmptyReference, "right side of concatenation has no levels", line,
         column);
  if (ref_real_context(rhs) != junction)
    fail(ErrorKind::ConcatMismatch,
         "cannot join a reference in context '" +
             (rhs.context_name.empty() ? std::string(kRootName) : rhs.context_name) +
             "' after a reference to '" + junction + "'",
         line, column);
  Ref out = lhs;
  for (const Segment& seg : rhs.segments) out.segments.push_back(seg);
  return out;
}

// ref : R changes the real (innermost) concept. Truncates to an existing
// level when R is above, extends with default levels when R is below.
inline Ref ref_right_cast(const ConceptTable& table, const Ref& ref, std::string_view R,
                          int line = 0, int column = 0) {
  std::string target = table.is_root(R) ? std::string(kRootName) : std::string(R);
  const std::string& real = ref_real_concept(ref, line, column);
  if (target == real) return ref;
  if (table.is_root(target))
    fail(ErrorKind::EmptyReference, "cast to the top concept leaves no levels", line,
         column);
  table.require(target, line, column);
  if (table.is_strictly_included(real, target)) {
    if (!table.is_strictly_included(target, ref.context_name))
      fail(ErrorKind::EmptyReference,
           "cast to '" + target + "' leaves no levels inside context '" +
               (ref.context_name.empty() ? std::string(kRootName) : ref.context_name) +
               "'",
           line, column);
    for (std::size_t i = ref.segments.size(); i-- > 0;) {
      if (ref.segments[i].concept_name == target) {
        Ref out;
        out.context_name = ref.context_name;
        out.segments.assign(ref.segments.begin(),
                            ref.segments.begin() + static_cast<std::ptrdiff_t>(i) + 1);
        return out;
      }
    }
    fail(ErrorKind::Cast, "reference has no level for '" + target + "'", line, column);
  }
  if (table.is_strictly_included(target, real)) {
    Ref out = ref;
    for (const std::string& c : table.lineage(target))
      if (table.is_strictly_included(c, real))
        out.segments.push_back(default_segment(table, c));
    return out;
  }
  fail(ErrorKind::Cast, "'" + target + "' is unrelated to '" + real + "'", line, column);
}

// L : ref changes the context. Narrowing drops outer levels; widening
// borrows the missing outer levels from an enclosing access reference.
inline Ref ref_left_cast(const ConceptTable& table, std::string_view L, const Ref& ref,
                         const std::vector<const Ref*>& enclosing,
                         std::size_t enclosing_from = 0, int line = 0, int column = 0) {
  std::string target = table.is_root(L) ? std::string() : std::string(L);
  if (!target.empty()) table.require(target, line, column);
  if (target == ref.context_name) return ref;

  if (table.is_strictly_included(target, ref.context_name)) {
    const std::string& real = ref_real_concept(ref, line, column);
    if (!table.is_strictly_included(real, target)) {
      if (table.is_included(target, real))
        fail(ErrorKind::EmptyReference,
             "context '" + target + "' leaves no levels in the reference", line, column);
      fail(ErrorKind::Cast, "context '" + target + "' is unrelated to '" + real + "'",
           line, column);
    }
    Ref out;
    out.context_name = target;
    bool keeping = false;
    for (const Segment& seg : ref.segments) {
      if (!keeping && table.is_strictly_included(seg.concept_name, target))
        keeping = true;
      if (keeping) out.segments.push_back(seg);
    }
    if (out.segments.empty())
      fail(ErrorKind::EmptyReference,
           "context '" + target + "' leaves no levels in the reference", line, column);
    return out;
  }

  if (!table.is_strictly_included(ref.context_name, target))
    fail(ErrorKind::Cast,
         "context '" + (target.empty() ? std::string(kRootName) : target) +
             "' is unrelated to context '" + ref.context_name + "'",
         line, column);

  // Widening: find an enclosing reference that reaches down to ref's context,
  // truncate it there, re-anchor that prefix at the new context, and join.
  for (std::size_t k = enclosing_from; k < enclosing.size(); ++k) {
    const Ref* enc = enclosing[k];
    if (!enc) continue;
    try {
      Ref prefix = ref_right_cast(table, *enc, ref.context_name, line, column);
      prefix = ref_left_cast(table, target, prefix, enclosing, k + 1, line, column);
      Ref out = prefix;
      for (const Segment& seg : ref.segments) out.segments.push_back(seg);
      return out;
    } catch (const CopError&) {
      continue;
    }
  }
  fail(ErrorKind::WideningUnavailable,
       "no enclosing reference reaches context '" + ref.context_name +
           "' to widen towards '" + (target.empty() ? std::string(kRootName) : target) +
           "'",
       line, column);
}

}  // namespace copri
