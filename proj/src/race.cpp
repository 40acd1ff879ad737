#include "ompfuzz/race.hpp"

#include <set>
#include <string>
#include <vector>

namespace ompfuzz {

namespace {

using NameSet = std::set<std::string, std::less<>>;

struct Scalar {
  std::string name;
  bool is_array;
};

bool reads_any(const Expression& e, const NameSet& names) {
  bool hit = false;
  for_each_read(e, [&](const std::string& n) { hit = hit || names.contains(n); });
  return hit;
}

bool contains_critical(const Block& b) {
  for (const auto& s : b.statements) {
    if (std::holds_alternative<Critical>(s.node)) return true;
    if (const auto* i = as<IfBlock>(s)) {
      if (contains_critical(i->body)) return true;
    } else if (const auto* f = as<ForLoop>(s)) {
      if (contains_critical(f->body)) return true;
    }
  }
  return false;
}

// Shared data of one parallel region.
struct RegionFacts {
  NameSet shared_scalars;  // declared outside, not privatised
  NameSet written;         // shared scalars the region assigns (incl. comp)
};

void collect_writes(const Block& b, const NameSet& shared, bool comp_shared, NameSet& out) {
  for (const auto& s : b.statements) {
    if (const auto* a = as<Assignment>(s)) {
      if (std::holds_alternative<CompTarget>(a->target)) {
        if (comp_shared) out.emplace(kCompName);
      } else if (const auto* v = std::get_if<VarTarget>(&a->target)) {
        if (shared.contains(v->name)) out.insert(v->name);
      }
    } else if (const auto* i = as<IfBlock>(s)) {
      collect_writes(i->body, shared, comp_shared, out);
    } else if (const auto* f = as<ForLoop>(s)) {
      collect_writes(f->body, shared, comp_shared, out);
    } else if (const auto* c = as<Critical>(s)) {
      collect_writes(c->body, shared, comp_shared, out);
    }
  }
}

class Enforcer {
 public:
  void declare_params(const std::vector<ParamDecl>& params) {
    scopes_.emplace_back();
    for (const auto& p : params) scopes_.back().push_back({p.name, p.kind == ParamKind::FpArray});
  }

  void block(Block& b) {
    scopes_.emplace_back();
    for (auto& s : b.statements) statement(s);
    scopes_.pop_back();
  }

 private:
  std::vector<std::vector<Scalar>> scopes_;

  void statement(Statement& s) {
    if (auto* d = as<TempDecl>(s)) {
      scopes_.back().push_back({d->name, false});
    } else if (auto* i = as<IfBlock>(s)) {
      block(i->body);
    } else if (auto* f = as<ForLoop>(s)) {
      block(f->body);
    } else if (auto* c = as<Critical>(s)) {
      block(c->body);
    } else if (auto* r = as<OmpParallel>(s)) {
      region(*r);
    }
  }

  void region(OmpParallel& r) {
    NameSet privatised(r.private_vars.begin(), r.private_vars.end());
    privatised.insert(r.firstprivate_vars.begin(), r.firstprivate_vars.end());
    RegionFacts facts;
    for (const auto& frame : scopes_)
      for (const auto& v : frame)
        if (!v.is_array && !privatised.contains(v.name)) facts.shared_scalars.insert(v.name);
    const bool comp_shared = !r.reduction.has_value();
    if (comp_shared) facts.shared_scalars.emplace(kCompName);
    collect_writes(r.body, facts.shared_scalars, comp_shared, facts.written);
    protect(r.body, facts, false, "parallel");
  }

  static bool writes_shared(const Assignment& a, const RegionFacts& facts) {
    if (std::holds_alternative<CompTarget>(a.target)) return facts.shared_scalars.contains(kCompName);
    if (const auto* v = std::get_if<VarTarget>(&a.target)) return facts.shared_scalars.contains(v->name);
    const auto& arr = std::get<ArrayTarget>(a.target);
    return !std::holds_alternative<ThreadIdSub>(arr.index);
  }

  static Statement wrap(Statement s) {
    Critical c;
    c.body.statements.push_back(std::move(s));
    return Statement{std::move(c)};
  }

  void protect(Block& b, const RegionFacts& facts, bool in_loop, const std::string& where) {
    for (std::size_t k = 0; k < b.statements.size(); ++k) {
      Statement& s = b.statements[k];
      const std::string loc = where + "[" + std::to_string(k) + "]";
      if (std::holds_alternative<Critical>(s.node)) continue;
      if (auto* a = as<Assignment>(s)) {
        if (!writes_shared(*a, facts) && !reads_any(a->expr, facts.written)) continue;
        if (!in_loop) throw RaceError("unprotectable shared access outside the worksharing loop at " + loc);
        s = wrap(std::move(s));
      } else if (auto* d = as<TempDecl>(s)) {
        if (reads_any(d->init, facts.written))
          throw RaceError("declaration reads racy shared data at " + loc);
      } else if (auto* i = as<IfBlock>(s)) {
        const bool racy = facts.written.contains(i->cond.lhs) || reads_any(i->cond.rhs, facts.written);
        if (racy) {
          if (!in_loop || contains_critical(i->body))
            throw RaceError("condition reads racy shared data at " + loc);
          s = wrap(std::move(s));
        } else {
          protect(i->body, facts, in_loop, loc + ".if");
        }
      } else if (auto* f = as<ForLoop>(s)) {
        protect(f->body, facts, true, loc + ".for");
      }
    }
  }
};

}  // namespace

Program enforce_race_freedom(Program program) {
  Enforcer e;
  e.declare_params(program.params);
  e.block(program.body);
  return program;
}

}  // namespace ompfuzz
