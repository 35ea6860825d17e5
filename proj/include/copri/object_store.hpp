#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "copri/diagnostics.hpp"
#include "copri/value.hpp"

namespace copri {

struct ObjectRecord {
  std::string concept_name;
  std::vector<FieldSlot> fields;
  std::uint64_t parent = 0;  // enclosing instance, 0 = none known
  bool alive = true;
};

// Heap of concept objects. Ids start at 1 and are never reused, so a stale
// handle is detectable for the rest of the run. Records live in a deque so
// field slots stay addressable while new objects are allocated.
class ObjectStore {
 public:
  std::uint64_t alloc(std::string concept_name, std::vector<FieldSlot> fields,
                      std::uint64_t parent = 0) {
    records_.push_back({std::move(concept_name), std::move(fields), parent, true});
    return records_.size();
  }

  bool exists(std::uint64_t id) const { return id >= 1 && id <= records_.size(); }

  const ObjectRecord& record(std::uint64_t id) const {
    check_id(id);
    return records_[id - 1];
  }
  ObjectRecord& record(std::uint64_t id) {
    check_id(id);
    return records_[id - 1];
  }

  ObjectRecord& live(std::uint64_t id, int line = 0, int column = 0) {
    ObjectRecord& rec = record(id);
    if (!rec.alive)
      fail(ErrorKind::DeadObject,
           "object " + std::to_string(id) + " (" + rec.concept_name + ") was deleted",
           line, column);
    return rec;
  }

  void free(std::uint64_t id, int line = 0, int column = 0) {
    ObjectRecord& rec = live(id, line, column);
    rec.alive = false;
    rec.fields.clear();
  }

  std::size_t size() const { return records_.size(); }
  std::size_t live_count() const {
    std::size_t n = 0;
    for (const ObjectRecord& r : records_)
      if (r.alive) ++n;
    return n;
  }

 private:
  void check_id(std::uint64_t id) const {
    if (!exists(id))
      fail(ErrorKind::DeadObject, "invalid object handle " + std::to_string(id));
  }

  std::deque<ObjectRecord> records_;
};

// Built-in Map values: identity-bearing associative containers. Lookup misses
// yield null, adds overwrite, removes of absent keys are no-ops.
class MapStore {
 public:
  std::uint64_t make() {
    maps_.emplace_back();
    return maps_.size();
  }

  void add(std::uint64_t id, const Value& key, Value value) {
    auto& entries = entries_of(id);
    for (auto& e : entries) {
      if (value_equals(e.key, key)) {
        e.value = std::move(value);
        return;
      }
    }
    entries.push_back({key, std::move(value)});
  }

  Value get(std::uint64_t id, const Value& key) const {
    for (const auto& e : entries_of(id))
      if (value_equals(e.key, key)) return e.value;
    return Value::null();
  }

  void remove(std::uint64_t id, const Value& key) {
    auto& entries = entries_of(id);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (value_equals(entries[i].key, key)) {
        entries.erase(entries.begin() + static_cast<std::ptrdiff_t>(i));
        return;
      }
    }
  }

  std::size_t entry_count(std::uint64_t id) const { return entries_of(id).size(); }
  std::size_t size() const { return maps_.size(); }

 private:
  struct MapEntry {
    Value key;
    Value value;
  };

  std::vector<MapEntry>& entries_of(std::uint64_t id) {
    if (id < 1 || id > maps_.size())
      fail(ErrorKind::Runtime, "invalid map handle " + std::to_string(id));
    return maps_[id - 1];
  }
  const std::vector<MapEntry>& entries_of(std::uint64_t id) const {
    if (id < 1 || id > maps_.size())
      fail(ErrorKind::Runtime, "invalid map handle " + std::to_string(id));
    return maps_[id - 1];
  }

  std::deque<std::vector<MapEntry>> maps_;
};

}  // namespace copri
