#include "fpt/process_file.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fpt {

using Json = nlohmann::ordered_json;

FilteredRandomVariable ProcessFile::frv() const {
  if (process) return process->as_frv();
  if (variable) return *variable;
  throw Error(Errc::kInvalidFile, "file holds no discrete-time process");
}

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::kInvalidFile, what); }

const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) bad(where + " is not an object");
  auto it = obj.find(key);
  if (it == obj.end()) bad(where + " misses \"" + key + "\"");
  return *it;
}

std::string str(const Json& j, const std::string& where) {
  if (!j.is_string()) bad(where + " must be a string");
  return j.get<std::string>();
}

Rational rational(const Json& j, const std::string& where) {
  if (j.is_number_integer()) return Rational(j.get<long>());
  try {
    return parse_rational(str(j, where));
  } catch (const Error& e) {
    if (e.code() == Errc::kInvalidFile) throw;
    bad(where + ": " + e.what());
  }
}

const Json& array(const Json& j, const std::string& where) {
  if (!j.is_array()) bad(where + " must be an array");
  return j;
}

std::shared_ptr<const StateSpace> read_states(const Json& root) {
  std::vector<State> states;
  const Json& list = array(field(root, "states", "file"), "states");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string where = "states[" + std::to_string(i) + "]";
    State s;
    s.label = str(field(list[i], "label", where), where + ".label");
    const Json& payload = array(field(list[i], "payload", where), where + ".payload");
    for (std::size_t k = 0; k < payload.size(); ++k) {
      s.payload.push_back(rational(payload[k], where + ".payload[" + std::to_string(k) + "]"));
    }
    states.push_back(std::move(s));
  }
  return std::make_shared<const StateSpace>(std::move(states));
}

FiniteProbSpace read_atoms(const Json& root) {
  std::vector<std::pair<std::string, Rational>> atoms;
  const Json& list = array(field(root, "atoms", "file"), "atoms");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string where = "atoms[" + std::to_string(i) + "]";
    atoms.emplace_back(str(field(list[i], "id", where), where + ".id"),
                       rational(field(list[i], "prob", where), where + ".prob"));
  }
  return FiniteProbSpace(std::move(atoms));
}

std::vector<Partition> read_partitions(const Json& root, const FiniteProbSpace& space,
                                       std::size_t count) {
  const Json& list = array(field(root, "filtration", "file"), "filtration");
  if (list.size() != count) {
    bad("filtration has " + std::to_string(list.size()) + " partitions, expected " +
        std::to_string(count));
  }
  std::vector<Partition> out;
  for (std::size_t t = 0; t < list.size(); ++t) {
    const std::string where = "filtration[" + std::to_string(t) + "]";
    std::vector<std::vector<std::string>> blocks;
    for (const auto& block : array(list[t], where)) {
      auto& b = blocks.emplace_back();
      for (const auto& id : array(block, where)) b.push_back(str(id, where));
    }
    out.push_back(Partition::from_ids(space, blocks));
  }
  return out;
}

std::vector<std::string> labels(const Json& j, const std::string& where) {
  std::vector<std::string> out;
  for (const auto& l : array(j, where)) out.push_back(str(l, where));
  return out;
}

// Per atom, in space order.
std::vector<const Json*> per_atom(const Json& map, const FiniteProbSpace& space,
                                  const std::string& where) {
  if (!map.is_object()) bad(where + " must be an object keyed by atom id");
  if (map.size() != space.size()) bad(where + " must have exactly one entry per atom");
  std::vector<const Json*> out;
  for (const auto& id : space.ids()) {
    auto it = map.find(id);
    if (it == map.end()) bad(where + " misses atom '" + id + "'");
    out.push_back(&*it);
  }
  return out;
}

Json write_states(const StateSpace& states) {
  Json list = Json::array();
  for (const auto& s : states.states()) {
    Json payload = Json::array();
    for (const auto& p : s.payload) payload.push_back(to_string(p));
    list.push_back(Json{{"label", s.label}, {"payload", payload}});
  }
  return list;
}

Json write_atoms(const FiniteProbSpace& space) {
  Json list = Json::array();
  for (std::size_t a = 0; a < space.size(); ++a) {
    list.push_back(Json{{"id", space.id(a)}, {"prob", to_string(space.weight(a))}});
  }
  return list;
}

Json write_partitions(const FiniteProbSpace& space, const std::vector<Partition>& steps) {
  Json list = Json::array();
  for (const auto& p : steps) {
    Json blocks = Json::array();
    for (const auto& block : p.blocks()) {
      Json b = Json::array();
      for (std::size_t a : block) b.push_back(space.id(a));
      blocks.push_back(b);
    }
    list.push_back(blocks);
  }
  return list;
}

Json header(const StateSpace& states, std::size_t timesteps) {
  Json root;
  root["version"] = 1;
  root["timesteps"] = timesteps;
  root["states"] = write_states(states);
  return root;
}

std::string dump(const Json& root) { return root.dump(2) + "\n"; }

}  // namespace

ProcessFile parse_process_file(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    bad(std::string("malformed JSON: ") + e.what());
  }
  const Json& version = field(root, "version", "file");
  if (!version.is_number_integer() || version.get<long>() != 1) bad("unsupported version");
  const Json& steps = field(root, "timesteps", "file");
  if (!steps.is_number_integer() || steps.get<long>() < 1) bad("timesteps must be a positive integer");

  ProcessFile f;
  f.timesteps = steps.get<std::size_t>();
  f.states = read_states(root);

  if (root.contains("law")) {
    const Json& law = root["law"];
    const Json& rank = field(law, "rank", "law");
    if (!rank.is_number_integer() || rank.get<long>() < 0) bad("law.rank must be a natural number");
    f.kind = FileKind::kLaw;
    f.law = decode_law(from_hex(str(field(law, "encoding", "law"), "law.encoding")));
    if (f.law->rank != rank.get<int>()) bad("law.rank disagrees with the encoding");
    for (const auto& [v, p] : f.law->dist) {
      NestedValue z = v;
      while (z.level() > 0) {
        if (z.timesteps() != f.timesteps) bad("law has the wrong number of timesteps");
        z = z.coord(1).entries().front().first;
      }
      for (const auto& l : z.labels()) {
        if (!f.states->contains(l)) bad("law mentions unknown state '" + l + "'");
      }
    }
    return f;
  }

  FiniteProbSpace space = read_atoms(root);
  const bool has_process = root.contains("process");
  const bool has_value = root.contains("value");
  if (has_process == has_value) bad("file needs exactly one of \"process\" and \"value\"");

  if (root.contains("events")) {
    std::vector<Rational> times;
    const Json& events = array(root["events"], "events");
    for (std::size_t j = 0; j < events.size(); ++j) {
      times.push_back(rational(events[j], "events[" + std::to_string(j) + "]"));
    }
    if (times.size() != f.timesteps) bad("timesteps must equal the number of events");
    TimeGrid grid(std::move(times));
    auto parts = read_partitions(root, space, f.timesteps);
    f.kind = FileKind::kStepProcess;
    if (has_process) {
      std::vector<std::vector<std::string>> paths;
      for (const Json* j : per_atom(root["process"], space, "process")) {
        paths.push_back(labels(*j, "process"));
      }
      f.step = StepFilteredProcess::with_paths(f.states, std::move(space), std::move(grid),
                                               std::move(parts), std::move(paths));
    } else {
      std::vector<std::string> terminal;
      for (const Json* j : per_atom(root["value"], space, "value")) {
        terminal.push_back(str(*j, "value"));
      }
      f.step = StepFilteredProcess::with_terminal(f.states, std::move(space), std::move(grid),
                                                  std::move(parts), std::move(terminal));
    }
    return f;
  }

  Filtration filtration(read_partitions(root, space, f.timesteps));
  if (has_process) {
    std::vector<std::vector<std::string>> paths;
    for (const Json* j : per_atom(root["process"], space, "process")) {
      paths.push_back(labels(*j, "process"));
    }
    f.kind = FileKind::kProcess;
    f.process = FilteredProcess(f.states, std::move(space), std::move(filtration),
                                std::move(paths));
  } else {
    std::vector<NestedValue> values;
    for (const Json* j : per_atom(root["value"], space, "value")) {
      values.push_back(j->is_array() ? NestedValue::point(labels(*j, "value"))
                                     : NestedValue::state(str(*j, "value")));
    }
    f.kind = FileKind::kVariable;
    f.variable = FilteredRandomVariable(f.states, std::move(space), std::move(filtration),
                                        std::move(values));
  }
  return f;
}

ProcessFile load_process_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kInvalidFile, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_process_file(buf.str());
}

std::string emit(const FilteredProcess& x) {
  Json root = header(x.states(), x.timesteps());
  root["atoms"] = write_atoms(x.space());
  root["filtration"] = write_partitions(x.space(), x.filtration().steps());
  Json process = Json::object();
  for (std::size_t a = 0; a < x.space().size(); ++a) process[x.space().id(a)] = x.paths()[a];
  root["process"] = process;
  return dump(root);
}

std::string emit(const FilteredRandomVariable& x) {
  if (x.level() != 0) throw Error(Errc::kInvalidArgument, "only level-0 values can be written");
  Json root = header(x.states(), x.timesteps());
  root["atoms"] = write_atoms(x.space());
  root["filtration"] = write_partitions(x.space(), x.filtration().steps());
  Json value = Json::object();
  for (std::size_t a = 0; a < x.space().size(); ++a) {
    const auto& l = x.value(a).labels();
    if (l.size() == 1) {
      value[x.space().id(a)] = l.front();
    } else {
      value[x.space().id(a)] = l;
    }
  }
  root["value"] = value;
  return dump(root);
}

std::string emit(const StepFilteredProcess& x) {
  Json root = header(x.states(), x.events().size());
  Json events = Json::array();
  for (const auto& t : x.events().times()) events.push_back(to_string(t));
  root["events"] = events;
  root["atoms"] = write_atoms(x.space());
  root["filtration"] = write_partitions(x.space(), x.partitions());
  Json out = Json::object();
  for (std::size_t a = 0; a < x.space().size(); ++a) {
    if (x.has_paths()) {
      out[x.space().id(a)] = x.paths()[a];
    } else {
      out[x.space().id(a)] = x.terminal()[a];
    }
  }
  root[x.has_paths() ? "process" : "value"] = out;
  return dump(root);
}

std::string emit(const NestedLaw& law, const StateSpace& states, std::size_t timesteps) {
  Json root = header(states, timesteps);
  root["law"] = Json{{"rank", law.rank}, {"encoding", to_hex(encode(law))}};
  return dump(root);
}

}  // namespace fpt
