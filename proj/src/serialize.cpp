#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "noisymax/error.hpp"
#include "noisymax/model.hpp"

namespace noisymax {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::Syntax, "at " + path + ": " + what);
}

const json& member(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path, std::string("missing field \"") + key + "\"");
  return *it;
}

const json& array_at(const json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array");
  return j;
}

std::string string_at(const json& j, const std::string& path) {
  if (!j.is_string()) schema_error(path, "expected a string");
  return j.get<std::string>();
}

double number_at(const json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  return j.get<double>();
}

std::vector<double> numbers_at(const json& j, const std::string& path) {
  array_at(j, path);
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number_at(j[i], path + "/" + std::to_string(i)));
  return out;
}

}  // namespace

Network parse_network(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Syntax, "JSON syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
  }

  const json& jvars = array_at(member(doc, "variables", ""), "/variables");
  std::vector<Variable> variables;
  std::map<std::string, VarId, std::less<>> ids;
  for (std::size_t i = 0; i < jvars.size(); ++i) {
    const std::string path = "/variables/" + std::to_string(i);
    Variable v;
    v.id = var_id(i);
    v.name = string_at(member(jvars[i], "name", path), path + "/name");
    const json& jstates = array_at(member(jvars[i], "states", path), path + "/states");
    for (std::size_t s = 0; s < jstates.size(); ++s) {
      v.states.push_back(string_at(jstates[s], path + "/states/" + std::to_string(s)));
    }
    if (!ids.emplace(v.name, v.id).second) {
      throw Error(ErrorKind::InvalidArgument, "duplicate variable name '" + v.name + "'");
    }
    variables.push_back(std::move(v));
  }

  auto resolve = [&](const json& j, const std::string& path) {
    std::string name = string_at(j, path);
    auto it = ids.find(name);
    if (it == ids.end()) throw Error(ErrorKind::DanglingReference, "at " + path + ": unknown variable '" + name + "'");
    return it->second;
  };

  std::vector<std::optional<Cpd>> cpds(variables.size());
  const json& jnodes = array_at(member(doc, "nodes", ""), "/nodes");
  for (std::size_t i = 0; i < jnodes.size(); ++i) {
    const std::string path = "/nodes/" + std::to_string(i);
    const json& node = jnodes[i];
    const VarId child = resolve(member(node, "child", path), path + "/child");
    const Variable& cv = variables[index(child)];
    if (cpds[index(child)]) throw Error(ErrorKind::InvalidArgument, "variable '" + cv.name + "' has two nodes");

    const json& jcpd = member(node, "cpd", path);
    const std::string type = string_at(member(jcpd, "type", path + "/cpd"), path + "/cpd/type");
    std::vector<VarId> parents;
    if (auto it = node.find("parents"); it != node.end()) {
      array_at(*it, path + "/parents");
      for (std::size_t k = 0; k < it->size(); ++k) parents.push_back(resolve((*it)[k], path + "/parents/" + std::to_string(k)));
    }

    if (type == "table") {
      std::vector<VarId> scope = parents;
      scope.push_back(child);
      std::vector<std::size_t> cards;
      for (VarId v : scope) cards.push_back(variables[index(v)].size());
      std::vector<double> values = numbers_at(member(jcpd, "values", path + "/cpd"), path + "/cpd/values");
      cpds[index(child)] = TableCpd{Factor(std::move(scope), std::move(cards), std::move(values))};
    } else if (type == "noisy-max") {
      NoisyMaxCpd nm;
      nm.effect = child;
      const json& jcauses = array_at(member(jcpd, "causes", path + "/cpd"), path + "/cpd/causes");
      for (std::size_t k = 0; k < jcauses.size(); ++k) nm.causes.push_back(resolve(jcauses[k], path + "/cpd/causes/" + std::to_string(k)));
      if (!parents.empty() && parents != nm.causes) {
        throw Error(ErrorKind::InvalidArgument, "at " + path + ": parents and causes disagree");
      }
      const json& jlinks = array_at(member(jcpd, "links", path + "/cpd"), path + "/cpd/links");
      if (jlinks.size() != nm.causes.size()) {
        throw Error(ErrorKind::MalformedDistribution, "at " + path + ": need one link table per cause");
      }
      for (std::size_t k = 0; k < jlinks.size(); ++k) {
        const std::string lpath = path + "/cpd/links/" + std::to_string(k);
        LinkTable link{nm.causes[k], {}};
        array_at(jlinks[k], lpath);
        for (std::size_t r = 0; r < jlinks[k].size(); ++r) link.rows.push_back(numbers_at(jlinks[k][r], lpath + "/" + std::to_string(r)));
        nm.links.push_back(std::move(link));
      }
      if (auto it = jcpd.find("leak"); it != jcpd.end()) nm.leak = numbers_at(*it, path + "/cpd/leak");
      cpds[index(child)] = std::move(nm);
    } else {
      schema_error(path + "/cpd/type", "unknown distribution type '" + type + "'");
    }
  }

  std::vector<Cpd> resolved;
  resolved.reserve(cpds.size());
  for (std::size_t i = 0; i < cpds.size(); ++i) {
    if (!cpds[i]) throw Error(ErrorKind::DanglingReference, "variable '" + variables[i].name + "' has no node");
    resolved.push_back(std::move(*cpds[i]));
  }
  return Network(std::move(variables), std::move(resolved));
}

std::string serialize_network(const Network& net) {
  ordered_json doc;
  ordered_json jvars = ordered_json::array();
  for (const auto& v : net.variables()) {
    jvars.push_back({{"name", v.name}, {"states", v.states}});
  }
  doc["variables"] = std::move(jvars);

  auto name = [&](VarId v) { return net.variable(v).name; };
  ordered_json jnodes = ordered_json::array();
  for (const auto& v : net.variables()) {
    ordered_json node;
    node["child"] = v.name;
    if (const auto* table = std::get_if<TableCpd>(&net.cpd(v.id))) {
      ordered_json parents = ordered_json::array();
      for (VarId p : net.parents(v.id)) parents.push_back(name(p));
      node["parents"] = std::move(parents);
      node["cpd"] = {{"type", "table"}, {"values", table->table.values()}};
    } else {
      const auto& nm = std::get<NoisyMaxCpd>(net.cpd(v.id));
      ordered_json cpd;
      cpd["type"] = "noisy-max";
      ordered_json causes = ordered_json::array();
      for (VarId c : nm.causes) causes.push_back(name(c));
      cpd["causes"] = std::move(causes);
      ordered_json links = ordered_json::array();
      for (const auto& link : nm.links) links.push_back(link.rows);
      cpd["links"] = std::move(links);
      if (nm.leak) cpd["leak"] = *nm.leak;
      node["cpd"] = std::move(cpd);
    }
    jnodes.push_back(std::move(node));
  }
  doc["nodes"] = std::move(jnodes);
  return doc.dump(2) + "\n";
}

Network load_network(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_network(buf.str());
}

}  // namespace noisymax
