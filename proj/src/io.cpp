#include "riskswitch/io.hpp"

#include <fstream>
#include <sstream>

namespace riskswitch::io {

namespace {

[[noreturn]] void schema_error(const std::string& msg) { throw Error(ErrorCode::Schema, msg); }

const json& field(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) schema_error(where + " must be an object");
  auto it = j.find(key);
  if (it == j.end()) schema_error(where + ": missing \"" + key + "\"");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) schema_error(where + " must be a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) schema_error(where + " must be an integer");
  return j.get<int>();
}

const json& array(const json& j, const std::string& where) {
  if (!j.is_array()) schema_error(where + " must be an array");
  return j;
}

const json& array_of(const json& j, std::size_t size, const std::string& where) {
  array(j, where);
  if (j.size() != size) {
    schema_error(where + " must have " + std::to_string(size) + " entries, found " + std::to_string(j.size()));
  }
  return j;
}

void check_version(const json& doc) {
  const json& v = field(doc, "version", "document");
  if (!v.is_number_integer() || v.get<int>() != kVersion) schema_error("unsupported version");
}

std::vector<std::vector<double>> matrix(const json& j, const std::string& where) {
  std::vector<std::vector<double>> out;
  for (std::size_t a = 0; a < array(j, where).size(); ++a) {
    const std::string w = where + "[" + std::to_string(a) + "]";
    std::vector<double> row;
    for (std::size_t b = 0; b < array(j[a], w).size(); ++b) row.push_back(number(j[a][b], w));
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<double> vector_of(const json& j, const std::string& where) {
  std::vector<double> out;
  for (const json& v : array(j, where)) out.push_back(number(v, where));
  return out;
}

// Library errors raised while building spaces from a document are schema errors of that document.
template <class Fn>
auto as_schema(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::InvalidPartition ||
        e.code() == ErrorCode::NotRefining || e.code() == ErrorCode::ZeroProbability ||
        e.code() == ErrorCode::NonNormalized) {
      schema_error(e.what());
    }
    throw;
  }
}

}  // namespace

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    schema_error(std::string("invalid JSON: ") + e.what());
  }
}

json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) schema_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::shared_ptr<const FilteredSpace> load_space(const json& doc) {
  const json& sp = field(doc, "space", "document");
  std::vector<double> probs = vector_of(field(sp, "probs", "space"), "space.probs");
  std::vector<std::string> ids;
  if (sp.contains("outcomes")) {
    for (const json& id : array(sp["outcomes"], "space.outcomes")) {
      if (!id.is_string()) schema_error("space.outcomes entries must be strings");
      ids.push_back(id.get<std::string>());
    }
    if (ids.size() != probs.size()) schema_error("space.outcomes and space.probs differ in length");
  } else {
    for (std::size_t k = 0; k < probs.size(); ++k) ids.push_back("w" + std::to_string(k + 1));
  }
  const std::size_t n = probs.size();
  if (n == 0) schema_error("space has no outcomes");

  std::vector<Partition> parts;
  const json& filt = array(field(doc, "filtration", "document"), "filtration");
  if (filt.empty()) schema_error("filtration needs at least one partition");
  for (std::size_t t = 0; t < filt.size(); ++t) {
    const std::string where = "filtration[" + std::to_string(t) + "]";
    std::vector<std::vector<std::size_t>> blocks;
    for (const json& b : array(filt[t], where)) {
      std::vector<std::size_t> block;
      for (const json& k : array(b, where)) {
        if (!k.is_number_integer() || k.get<long long>() < 0) schema_error(where + ": outcome indices must be >= 0");
        block.push_back(k.get<std::size_t>());
      }
      blocks.push_back(std::move(block));
    }
    parts.push_back(as_schema([&] { return Partition::build(n, std::move(blocks)); }));
  }
  return as_schema([&] {
    return FilteredSpace::make(OutcomeSpace::build(std::move(ids), std::move(probs)), Filtration::build(std::move(parts)));
  });
}

json dump_space(const FilteredSpace& space) {
  json filt = json::array();
  for (const Partition& p : space.filtration().partitions()) filt.push_back(p.blocks());
  const std::vector<double> probs(space.space().probs().begin(), space.space().probs().end());
  return {{"space", {{"outcomes", space.space().ids()}, {"probs", probs}}}, {"filtration", filt}};
}

RiskSpec load_risk(const json& j) {
  const json& kind = field(j, "kind", "risk");
  if (!kind.is_string()) schema_error("risk.kind must be a string");
  const std::string k = kind.get<std::string>();
  RiskSpec r;
  if (k == "linear") {
    r = RiskSpec::linear();
  } else if (k == "entropic") {
    r = RiskSpec::entropic(number(field(j, "theta", "risk"), "risk.theta"));
  } else if (k == "worst_case") {
    r = RiskSpec::worst_case();
  } else if (k == "cvar") {
    r = RiskSpec::cvar(number(field(j, "alpha", "risk"), "risk.alpha"));
  } else {
    schema_error("unknown risk kind \"" + k + "\"");
  }
  as_schema([&] {
    r.validate();
    return 0;
  });
  return r;
}

json dump_risk(const RiskSpec& r) {
  switch (r.kind) {
    case RiskKind::Linear: return {{"kind", "linear"}};
    case RiskKind::Entropic: return {{"kind", "entropic"}, {"theta", r.theta}};
    case RiskKind::WorstCase: return {{"kind", "worst_case"}};
    case RiskKind::CVaR: return {{"kind", "cvar"}, {"alpha", r.alpha}};
  }
  return {};
}

RandomVariable load_rv(const json& j, std::size_t n, const std::string& where) {
  if (j.is_number()) return RandomVariable(n, j.get<double>());
  array_of(j, n, where);
  std::vector<double> v;
  for (const json& x : j) v.push_back(number(x, where));
  return RandomVariable(std::move(v));
}

json dump_rv(const RandomVariable& x) { return json(x.values()); }

json dump_table(const Table& t) {
  json out = json::array();
  for (const auto& row : t) {
    json r = json::array();
    for (const RandomVariable& x : row) r.push_back(dump_rv(x));
    out.push_back(std::move(r));
  }
  return out;
}

Table load_table(const json& j, std::size_t modes, std::size_t steps, std::size_t n, const std::string& where) {
  array_of(j, modes, where);
  Table out(modes);
  for (std::size_t i = 0; i < modes; ++i) {
    const std::string wi = where + "[" + std::to_string(i) + "]";
    array_of(j[i], steps, wi);
    for (std::size_t t = 0; t < steps; ++t) out[i].push_back(load_rv(j[i][t], n, wi + "[" + std::to_string(t) + "]"));
  }
  return out;
}

SwitchingProblem load_problem(const json& doc) {
  check_version(doc);
  auto space = load_space(doc);
  const std::size_t n = space->size();
  const int horizon = space->horizon();
  const auto steps = static_cast<std::size_t>(horizon + 1);
  if (doc.contains("T") && integer(doc["T"], "T") != horizon) schema_error("T does not match the filtration length");
  const int m = integer(field(doc, "m", "document"), "m");
  if (m < 1) schema_error("m must be >= 1");
  const auto mm = static_cast<std::size_t>(m);
  Table g = load_table(field(doc, "g", "document"), mm, steps, n, "g");
  std::vector<Table> c(mm, Table(mm, std::vector<RandomVariable>(steps, RandomVariable(n, 0.0))));
  if (doc.contains("c")) {
    const json& cj = array_of(doc["c"], mm, "c");
    for (std::size_t i = 0; i < mm; ++i) c[i] = load_table(cj[i], mm, steps, n, "c[" + std::to_string(i) + "]");
  }
  std::vector<std::vector<bool>> allowed;
  if (doc.contains("allowed")) {
    const json& aj = array_of(doc["allowed"], mm, "allowed");
    for (std::size_t i = 0; i < mm; ++i) {
      std::vector<bool> row;
      for (const json& v : array_of(aj[i], mm, "allowed")) {
        if (!v.is_boolean()) schema_error("allowed entries must be booleans");
        row.push_back(v.get<bool>());
      }
      allowed.push_back(std::move(row));
    }
  }
  const RiskSpec risk = load_risk(field(doc, "risk", "document"));
  return as_schema([&] { return SwitchingProblem::make(space, risk, std::move(g), std::move(c), std::move(allowed)); });
}

json dump_problem(const SwitchingProblem& p) {
  json doc = dump_space(*p.space);
  doc["version"] = kVersion;
  doc["T"] = p.horizon();
  doc["m"] = p.m;
  doc["g"] = dump_table(p.g);
  json c = json::array();
  for (const Table& row : p.c) c.push_back(dump_table(row));
  doc["c"] = c;
  if (!p.allowed.empty()) doc["allowed"] = p.allowed;
  doc["risk"] = dump_risk(p.risk);
  return doc;
}

StoppingProblem load_stopping(const json& doc) {
  check_version(doc);
  StoppingProblem sp;
  sp.space = load_space(doc);
  const std::size_t n = sp.space->size();
  const auto steps = static_cast<std::size_t>(sp.space->horizon() + 1);
  if (doc.contains("T") && integer(doc["T"], "T") != sp.space->horizon()) {
    schema_error("T does not match the filtration length");
  }
  const json& f = array_of(field(doc, "f", "document"), steps, "f");
  const json& h = array_of(field(doc, "h", "document"), steps, "h");
  for (std::size_t t = 0; t < steps; ++t) {
    sp.f.push_back(load_rv(f[t], n, "f[" + std::to_string(t) + "]"));
    sp.h.push_back(load_rv(h[t], n, "h[" + std::to_string(t) + "]"));
  }
  sp.risk = load_risk(field(doc, "risk", "document"));
  as_schema([&] {
    sp.validate();
    return 0;
  });
  return sp;
}

json dump_stopping(const StoppingProblem& sp) {
  json doc = dump_space(*sp.space);
  doc["version"] = kVersion;
  doc["T"] = sp.horizon();
  json f = json::array();
  json h = json::array();
  for (const auto& x : sp.f) f.push_back(dump_rv(x));
  for (const auto& x : sp.h) h.push_back(dump_rv(x));
  doc["f"] = f;
  doc["h"] = h;
  doc["risk"] = dump_risk(sp.risk);
  return doc;
}

json dump_value_field(const ValueField& vf) {
  json doc{{"version", kVersion}, {"kind", "value_field"}, {"V", dump_table(vf.V)}, {"selection", vf.selection}};
  if (!vf.terminal.empty()) {
    json term = json::array();
    for (const auto& x : vf.terminal) term.push_back(dump_rv(x));
    doc["terminal"] = term;
  }
  return doc;
}

ValueField load_value_field(const json& doc, const SwitchingProblem& p) {
  check_version(doc);
  const auto mm = static_cast<std::size_t>(p.m);
  const auto steps = static_cast<std::size_t>(p.horizon() + 1);
  ValueField vf;
  vf.V = load_table(field(doc, "V", "value_field"), mm, steps, p.size(), "V");
  if (doc.contains("selection")) {
    const json& s = array_of(doc["selection"], mm, "selection");
    for (std::size_t i = 0; i < mm; ++i) {
      std::vector<std::vector<Mode>> rows;
      for (const json& row : array_of(s[i], steps, "selection")) {
        std::vector<Mode> r;
        for (const json& v : array_of(row, p.size(), "selection")) r.push_back(integer(v, "selection"));
        rows.push_back(std::move(r));
      }
      vf.selection.push_back(std::move(rows));
    }
  }
  if (doc.contains("terminal")) {
    for (const json& x : array_of(doc["terminal"], mm, "terminal")) vf.terminal.push_back(load_rv(x, p.size(), "terminal"));
  }
  return vf;
}

json dump_strategy(const Strategy& xi) { return {{"start", xi.start}, {"initial", xi.initial}, {"modes", xi.modes}}; }

json dump_triple(const RbsdeTriple& tr) {
  return {{"version", kVersion}, {"kind", "rbsde_triple"}, {"Y", dump_table(tr.Y)}, {"M", dump_table(tr.M)},
          {"A", dump_table(tr.A)}};
}

RbsdeTriple load_triple(const json& doc, std::size_t modes, int horizon, std::size_t n) {
  check_version(doc);
  const auto steps = static_cast<std::size_t>(horizon + 1);
  RbsdeTriple tr;
  tr.Y = load_table(field(doc, "Y", "rbsde_triple"), modes, steps, n, "Y");
  tr.M = load_table(field(doc, "M", "rbsde_triple"), modes, steps, n, "M");
  tr.A = load_table(field(doc, "A", "rbsde_triple"), modes, steps, n, "A");
  return tr;
}

json dump_report(const VerificationReport& r) {
  json checks = json::array();
  for (const CheckResult& c : r.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"max_violation", c.max_violation}, {"where", c.where}});
  }
  return {{"version", kVersion}, {"kind", "verification_report"}, {"passed", r.passed()}, {"checks", checks}};
}

DiscountedMarkovParams load_discounted(const json& doc) {
  check_version(doc);
  const json& kind = field(doc, "kind", "generator");
  if (!kind.is_string() || kind.get<std::string>() != "discounted_markov") {
    schema_error("generator kind must be \"discounted_markov\"");
  }
  DiscountedMarkovParams p;
  p.alpha = number(field(doc, "alpha", "generator"), "alpha");
  p.transition = matrix(field(doc, "transition", "generator"), "transition");
  p.g_hat = matrix(field(doc, "g_hat", "generator"), "g_hat");
  if (doc.contains("c_hat")) {
    for (std::size_t i = 0; i < array(doc["c_hat"], "c_hat").size(); ++i) {
      p.c_hat.push_back(matrix(doc["c_hat"][i], "c_hat[" + std::to_string(i) + "]"));
    }
  }
  if (doc.contains("initial_state")) p.initial_state = integer(doc["initial_state"], "initial_state");
  p.risk = doc.contains("risk") ? load_risk(doc["risk"]) : RiskSpec::linear();
  return p;
}

DiscountedStoppingParams load_discounted_stopping(const json& doc) {
  check_version(doc);
  const json& kind = field(doc, "kind", "generator");
  if (!kind.is_string() || kind.get<std::string>() != "discounted_markov_stopping") {
    schema_error("generator kind must be \"discounted_markov_stopping\"");
  }
  DiscountedStoppingParams p;
  p.alpha = number(field(doc, "alpha", "generator"), "alpha");
  p.transition = matrix(field(doc, "transition", "generator"), "transition");
  p.f_hat = vector_of(field(doc, "f_hat", "generator"), "f_hat");
  p.h_hat = vector_of(field(doc, "h_hat", "generator"), "h_hat");
  if (doc.contains("initial_state")) p.initial_state = integer(doc["initial_state"], "initial_state");
  p.risk = doc.contains("risk") ? load_risk(doc["risk"]) : RiskSpec::linear();
  return p;
}

HydroConfig load_hydro(const json& doc) {
  check_version(doc);
  HydroConfig cfg = HydroConfig::defaults();
  auto num = [&](const char* key, double& out) {
    if (doc.contains(key)) out = number(doc[key], key);
  };
  auto whole = [&](const char* key, int& out) {
    if (doc.contains(key)) out = integer(doc[key], key);
  };
  whole("T", cfg.T);
  whole("L", cfg.L);
  num("m_min", cfg.m_min);
  num("m_max", cfg.m_max);
  whole("grid_points", cfg.grid_points);
  num("eta0", cfg.eta0);
  num("price_cap", cfg.price_cap);
  whole("rain_lag", cfg.rain_lag);
  num("inflow_scale", cfg.inflow_scale);
  num("shortfall_price", cfg.shortfall_price);
  num("water_value", cfg.water_value);
  num("switch_cost", cfg.switch_cost);
  num("theta", cfg.theta);
  num("initial_level", cfg.initial_level);
  whole("initial_price_state", cfg.initial_price_state);
  whole("initial_bid", cfg.initial_bid);
  if (doc.contains("price_levels")) cfg.price_levels = matrix(doc["price_levels"], "price_levels");
  if (doc.contains("price_transition")) cfg.price_transition = matrix(doc["price_transition"], "price_transition");
  if (doc.contains("rain_values")) cfg.rain_values = vector_of(doc["rain_values"], "rain_values");
  if (doc.contains("rain_intensity")) cfg.rain_intensity = matrix(doc["rain_intensity"], "rain_intensity");
  if (doc.contains("bids")) {
    cfg.bids.clear();
    for (const json& b : array(doc["bids"], "bids")) {
      Bid bid;
      for (const json& leg : array(b, "bids")) {
        bid.push_back({number(field(leg, "energy", "bid leg"), "energy"), number(field(leg, "price", "bid leg"), "price")});
      }
      cfg.bids.push_back(std::move(bid));
    }
  }
  as_schema([&] {
    cfg.validate();
    return 0;
  });
  return cfg;
}

json dump_hydro_config(const HydroConfig& cfg) {
  json bids = json::array();
  for (const Bid& b : cfg.bids) {
    json legs = json::array();
    for (const BidLeg& l : b) legs.push_back({{"energy", l.energy}, {"price", l.price}});
    bids.push_back(legs);
  }
  return {{"version", kVersion},
          {"T", cfg.T},
          {"L", cfg.L},
          {"bids", bids},
          {"m_min", cfg.m_min},
          {"m_max", cfg.m_max},
          {"grid_points", cfg.grid_points},
          {"eta0", cfg.eta0},
          {"price_levels", cfg.price_levels},
          {"price_transition", cfg.price_transition},
          {"price_cap", cfg.price_cap},
          {"rain_values", cfg.rain_values},
          {"rain_intensity", cfg.rain_intensity},
          {"rain_lag", cfg.rain_lag},
          {"inflow_scale", cfg.inflow_scale},
          {"shortfall_price", cfg.shortfall_price},
          {"water_value", cfg.water_value},
          {"switch_cost", cfg.switch_cost},
          {"theta", cfg.theta},
          {"initial_level", cfg.initial_level},
          {"initial_price_state", cfg.initial_price_state},
          {"initial_bid", cfg.initial_bid}};
}

std::string render(const json& j) { return j.dump(2) + "\n"; }

}  // namespace riskswitch::io
