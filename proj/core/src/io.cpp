#include "psrlab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "psrlab/errors.hpp"

namespace psrlab {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write " + path.string());
  out << text;
  if (!out) throw ParseError("write failed for " + path.string());
}

Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

void require_known_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected a JSON object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ParseError(where + ": unknown key \"" + key + "\"");
  }
}

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

// Runs `fn`, turning JSON library type/range errors into ParseError.
template <class Fn>
auto guarded(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
}

int get_int(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ParseError(where + ": missing key \"" + key + "\"");
  const Json& v = j.at(key);
  if (!v.is_number_integer()) throw ParseError(where + ": \"" + key + "\" must be an integer");
  return v.get<int>();
}

double get_real(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  return v.get<double>();
}

Vector real_vector(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = get_real(j[i], where);
  return v;
}

Matrix real_matrix(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? 0 : j[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw ParseError(where + ": ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = get_real(j[r][c], where);
  }
  return m;
}

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

std::string hoa_key(int h, int o, int a) {
  return std::to_string(h) + "," + std::to_string(o) + "," + std::to_string(a);
}

// Parses "h,o,a" into 1-based h and 0-based ids, validating ranges.
void parse_hoa(const std::string& key, int H, int O, int A, int hMax, int& h, int& o, int& a, const std::string& where) {
  int consumed = 0;
  if (std::sscanf(key.c_str(), "%d,%d,%d%n", &h, &o, &a, &consumed) != 3 || consumed != static_cast<int>(key.size())) {
    throw ParseError(where + ": key \"" + key + "\" is not of the form h,o,a");
  }
  if (h < 1 || h > hMax || o < 0 || o >= O || a < 0 || a >= A) {
    throw ParseError(where + ": key \"" + key + "\" out of range (H=" + std::to_string(H) + ")");
  }
}

Json rewards_json(const RewardTable& r, int H, int O, int A) {
  Json out = Json::object();
  for (int h = 1; h <= H; ++h) {
    for (int o = 0; o < O; ++o) {
      for (int a = 0; a < A; ++a) {
        if (r(h, o, a) != 0.0) out[hoa_key(h, o, a)] = r(h, o, a);
      }
    }
  }
  return out;
}

RewardTable rewards_from_json(const Json& j, int H, int O, int A, const std::string& where) {
  RewardTable r(H, O, A);
  if (!j.is_object()) throw ParseError(where + ": rewards must be an object");
  for (const auto& [key, v] : j.items()) {
    int h = 0, o = 0, a = 0;
    parse_hoa(key, H, O, A, H, h, o, a, where + ".rewards");
    r.set(h, o, a, get_real(v, where + ".rewards"));
  }
  return r;
}

}  // namespace

std::vector<int> int_list(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array of integers");
  std::vector<int> out;
  for (const Json& v : j) {
    if (!v.is_number_integer()) throw ParseError(where + ": expected integers");
    out.push_back(v.get<int>());
  }
  return out;
}

Json psr_to_json(const PsrModel& model) {
  Json j;
  j["H"] = model.horizon();
  j["obs"] = model.obs_count();
  j["act"] = model.act_count();
  Json core = Json::array();
  for (const auto& step : model.core_tests().all()) {
    Json tests = Json::array();
    for (const Test& t : step) tests.push_back(Json{{"obs", t.obs}, {"act", t.act}});
    core.push_back(std::move(tests));
  }
  j["coreTests"] = std::move(core);
  j["q0"] = vector_json(model.q0());
  Json ops = Json::object();
  for (int h = 1; h < model.readout_step(); ++h) {
    for (int o = 0; o < model.obs_count(); ++o) {
      for (int a = 0; a < model.act_count(); ++a) ops[hoa_key(h, o, a)] = matrix_json(model.op(o, a, h));
    }
  }
  j["ops"] = std::move(ops);
  j["rewards"] = rewards_json(model.rewards(), model.horizon(), model.obs_count(), model.act_count());
  return j;
}

PsrModel psr_from_json(const Json& j) {
  const std::string where = "PSR model";
  require_known_keys(j, {"H", "obs", "act", "coreTests", "q0", "ops", "rewards"}, where);
  return guarded(where, [&] {
    const int H = get_int(j, "H", where);
    const int O = get_int(j, "obs", where);
    const int A = get_int(j, "act", where);
    if (H < 1 || O < 1 || A < 1) throw ParseError(where + ": H, obs and act must be positive");
    std::vector<std::vector<Test>> perStep;
    for (const Json& step : j.at("coreTests")) {
      std::vector<Test> tests;
      for (const Json& t : step) {
        require_known_keys(t, {"obs", "act"}, where + ".coreTests");
        tests.push_back(Test{int_list(t.at("obs"), where + ".coreTests"), int_list(t.at("act"), where + ".coreTests")});
      }
      perStep.push_back(std::move(tests));
    }
    const int L = static_cast<int>(perStep.size());
    if (L < 1 || L > H) throw ParseError(where + ": coreTests must cover between 1 and H steps");
    CoreTestSet core(std::move(perStep));
    std::vector<Matrix> ops(static_cast<std::size_t>(L - 1) * static_cast<std::size_t>(O) * static_cast<std::size_t>(A));
    std::vector<bool> seen(ops.size(), false);
    const Json& jops = j.at("ops");
    if (!jops.is_object()) throw ParseError(where + ": ops must be an object");
    for (const auto& [key, v] : jops.items()) {
      int h = 0, o = 0, a = 0;
      parse_hoa(key, H, O, A, L - 1, h, o, a, where + ".ops");
      const std::size_t i = (static_cast<std::size_t>(h - 1) * static_cast<std::size_t>(O) + static_cast<std::size_t>(o)) *
                                static_cast<std::size_t>(A) +
                            static_cast<std::size_t>(a);
      ops[i] = real_matrix(v, where + ".ops[" + key + "]");
      seen[i] = true;
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
      if (!seen[i]) throw ParseError(where + ": ops is missing an operator (index " + std::to_string(i) + ")");
    }
    RewardTable rewards = j.contains("rewards") ? rewards_from_json(j.at("rewards"), H, O, A, where) : RewardTable(H, O, A);
    return PsrModel(H, O, A, std::move(core), real_vector(j.at("q0"), where + ".q0"), std::move(ops), std::move(rewards));
  });
}

Json pomdp_to_json(const Pomdp& p) {
  Json j;
  j["S"] = p.stateCount;
  j["O"] = p.obsCount;
  j["A"] = p.actCount;
  j["H"] = p.horizon;
  Json t = Json::array();
  for (int h = 1; h < p.horizon; ++h) {
    Json perA = Json::array();
    for (int a = 0; a < p.actCount; ++a) perA.push_back(matrix_json(p.trans(h, a).transpose()));
    t.push_back(std::move(perA));
  }
  j["T"] = std::move(t);
  Json e = Json::array();
  for (int h = 1; h <= p.horizon; ++h) e.push_back(matrix_json(p.emit(h).transpose()));
  j["Omission"] = std::move(e);
  j["mu1"] = vector_json(p.mu1);
  j["rewards"] = rewards_json(p.rewards, p.horizon, p.obsCount, p.actCount);
  return j;
}

Pomdp pomdp_from_json(const Json& j) {
  const std::string where = "POMDP";
  require_known_keys(j, {"S", "O", "A", "H", "T", "Omission", "mu1", "rewards"}, where);
  return guarded(where, [&] {
    const int S = get_int(j, "S", where);
    const int O = get_int(j, "O", where);
    const int A = get_int(j, "A", where);
    const int H = get_int(j, "H", where);
    if (S < 1 || O < 1 || A < 1 || H < 1) throw ParseError(where + ": sizes must be positive");
    Pomdp p = Pomdp::zeros(S, O, A, H);
    const Json& t = j.at("T");
    // T_H never acts within the episode; files may include or omit it.
    if (!t.is_array() || (static_cast<int>(t.size()) != H - 1 && static_cast<int>(t.size()) != H)) {
      throw ParseError(where + ": T must list H-1 or H steps");
    }
    for (int h = 1; h < H; ++h) {
      const Json& perA = t[static_cast<std::size_t>(h - 1)];
      if (!perA.is_array() || static_cast<int>(perA.size()) != A) throw ParseError(where + ": T[h] must list every action");
      for (int a = 0; a < A; ++a) {
        Matrix m = real_matrix(perA[static_cast<std::size_t>(a)], where + ".T");
        if (m.rows() != S || m.cols() != S) throw ParseError(where + ": T[h][a] must be S x S");
        p.trans(h, a) = m.transpose();
      }
    }
    const Json& e = j.at("Omission");
    if (!e.is_array() || static_cast<int>(e.size()) != H) throw ParseError(where + ": Omission must list H steps");
    for (int h = 1; h <= H; ++h) {
      Matrix m = real_matrix(e[static_cast<std::size_t>(h - 1)], where + ".Omission");
      if (m.rows() != S || m.cols() != O) throw ParseError(where + ": Omission[h] must be S x O");
      p.emit(h) = m.transpose();
    }
    p.mu1 = real_vector(j.at("mu1"), where + ".mu1");
    if (p.mu1.size() != S) throw ParseError(where + ": mu1 must have S entries");
    if (j.contains("rewards")) p.rewards = rewards_from_json(j.at("rewards"), H, O, A, where);
    p.validate();
    return p;
  });
}

Json generator_spec_to_json(const GeneratorSpec& s) {
  Json j;
  j["family"] = to_string(s.family);
  j["S"] = s.stateCount;
  j["O"] = s.obsCount;
  j["A"] = s.actCount;
  j["H"] = s.horizon;
  j["m"] = s.m;
  j["dTrans"] = s.dTrans;
  j["alpha"] = s.alpha;
  j["sigmaFloor"] = s.sigmaFloor;
  j["seed"] = s.seed;
  j["maxRetries"] = s.maxRetries;
  return j;
}

GeneratorSpec generator_spec_from_json(const Json& j) {
  const std::string where = "generator spec";
  require_known_keys(j, {"family", "S", "O", "A", "H", "m", "dTrans", "alpha", "sigmaFloor", "seed", "maxRetries"}, where);
  return guarded(where, [&] {
    GeneratorSpec s;
    if (!j.contains("family") || !j.at("family").is_string()) throw ParseError(where + ": missing string \"family\"");
    s.family = parse_generator_family(j.at("family").get<std::string>());
    if (s.family == GeneratorFamily::Lock) {
      s.stateCount = 2;
      s.obsCount = 3;
    }
    if (j.contains("S")) s.stateCount = get_int(j, "S", where);
    if (j.contains("O")) s.obsCount = get_int(j, "O", where);
    if (j.contains("A")) s.actCount = get_int(j, "A", where);
    if (j.contains("H")) s.horizon = get_int(j, "H", where);
    if (j.contains("m")) s.m = get_int(j, "m", where);
    if (j.contains("dTrans")) s.dTrans = get_int(j, "dTrans", where);
    if (j.contains("alpha")) s.alpha = get_real(j.at("alpha"), where + ".alpha");
    if (j.contains("sigmaFloor")) s.sigmaFloor = get_real(j.at("sigmaFloor"), where + ".sigmaFloor");
    if (j.contains("seed")) {
      if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer()) throw ParseError(where + ": seed must be an integer");
      s.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("maxRetries")) s.maxRetries = get_int(j, "maxRetries", where);
    return s;
  });
}

Json policy_to_json(const Policy& pi, int horizon, int obsCount) {
  Json j;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TabularPolicy>) {
          j["type"] = "tabular";
          j["H"] = p.horizon();
          j["obs"] = p.obs_count();
          j["act"] = p.act_count();
          Json steps = Json::array();
          for (int h = 1; h <= p.horizon(); ++h) {
            Json rows = Json::array();
            for (std::size_t c = 0; c < p.rows(h); ++c) {
              auto row = p.row(h, c);
              rows.push_back(Json(std::vector<double>(row.begin(), row.end())));
            }
            steps.push_back(std::move(rows));
          }
          j["table"] = std::move(steps);
        } else if constexpr (std::is_same_v<T, UniformPolicy>) {
          j["type"] = "uniform";
          j["act"] = pi.act_count();
        } else if constexpr (std::is_same_v<T, FixedSequencePolicy>) {
          j["type"] = "fixed-sequence";
          j["act"] = pi.act_count();
          j["startStep"] = p.startStep;
          j["actions"] = p.actions;
        } else {
          j["type"] = "composite";
          j["act"] = pi.act_count();
          j["uniformStep"] = p.uniformStep;
          j["sequence"] = p.sequence;
          if (p.prefix) j["prefix"] = policy_to_json(*p.prefix, horizon, obsCount);
        }
      },
      pi.variant());
  return j;
}

Json validation_to_json(const ValidationReport& r) {
  return Json{{"valid", r.valid()},
              {"massOk", r.massOk},
              {"nonnegOk", r.nonnegOk},
              {"consistencyOk", r.consistencyOk},
              {"massError", r.massError},
              {"maxActionMassError", r.maxActionMassError},
              {"minTrajProb", r.minTrajProb},
              {"maxGroupMass", r.maxGroupMass}};
}

Json lift_report_to_json(const LiftReport& r) {
  Json j;
  j["kind"] = to_string(r.kind);
  j["m"] = r.m;
  Json res = Json::array();
  for (const auto& x : r.residuals) res.push_back(x ? Json(*x) : Json(nullptr));
  j["residuals"] = std::move(res);
  Json d = Json::array();
  for (const auto& x : r.dPsr) d.push_back(x ? Json(*x) : Json(nullptr));
  j["dPsr"] = std::move(d);
  j["sigmaMin"] = r.sigmaMin;
  j["alpha"] = r.alpha ? Json(*r.alpha) : Json(nullptr);
  j["poolDepth"] = r.poolDepth;
  j["model"] = psr_to_json(r.model);
  return j;
}

void write_trace_csv(std::ostream& os, const RegretTrace& trace) {
  os << "k,V_star,V_pik_true,V_pik_optimistic,conf_set_size,fstar_in_set,cum_regret,tv_max,b_err_max,wall_ms\n";
  for (const TraceRow& r : trace.rows) {
    os << r.k << ',' << format_real(r.vStar) << ',' << format_real(r.vTrue) << ',' << format_real(r.vOptimistic) << ','
       << r.confSetSize << ',' << (r.fstarInSet ? 1 : 0) << ',' << format_real(r.cumRegret) << ','
       << (r.tvMax ? format_real(*r.tvMax) : "") << ',' << (r.bErrMax ? format_real(*r.bErrMax) : "") << ','
       << format_real(r.wallMs) << '\n';
  }
}

std::string trace_csv(const RegretTrace& trace) {
  std::ostringstream os;
  write_trace_csv(os, trace);
  return os.str();
}

std::vector<TraceRow> read_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("k,V_star,", 0) != 0) throw ParseError("trace CSV: missing header");
  std::vector<TraceRow> rows;
  int lineNo = 1;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 10) throw ParseError("trace CSV line " + std::to_string(lineNo) + ": expected 10 fields");
    try {
      TraceRow r;
      r.k = std::stoi(f[0]);
      r.vStar = std::stod(f[1]);
      r.vTrue = std::stod(f[2]);
      r.vOptimistic = std::stod(f[3]);
      r.confSetSize = std::stoi(f[4]);
      r.fstarInSet = f[5] == "1";
      r.cumRegret = std::stod(f[6]);
      if (!f[7].empty()) r.tvMax = std::stod(f[7]);
      if (!f[8].empty()) r.bErrMax = std::stod(f[8]);
      r.wallMs = std::stod(f[9]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw ParseError("trace CSV line " + std::to_string(lineNo) + ": malformed number");
    }
  }
  return rows;
}

}  // namespace psrlab
