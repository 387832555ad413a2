#include "dynprice/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <random>
#include <stdexcept>

#include "dynprice/errors.hpp"

namespace dynprice {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ModelError(path + ": " + what);
}

const Json& field(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) fail(path, "missing field '" + key + "'");
  return obj.at(key);
}

std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

}  // namespace

Market parse_market(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ModelError(std::string("$: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("$", "expected an object");

  const Json& items_json = field(doc, "items", "$");
  if (!items_json.is_array()) fail("$.items", "expected an array");
  std::vector<ItemId> items;
  for (std::size_t i = 0; i < items_json.size(); ++i) {
    items.push_back(as_string(items_json[i], "$.items[" + std::to_string(i) + "]"));
  }

  const Json& buyers_json = field(doc, "buyers", "$");
  if (!buyers_json.is_array()) fail("$.buyers", "expected an array");
  std::vector<Buyer> buyers;
  for (std::size_t k = 0; k < buyers_json.size(); ++k) {
    const std::string path = "$.buyers[" + std::to_string(k) + "]";
    const Json& bj = buyers_json[k];
    if (!bj.is_object()) fail(path, "expected an object");
    Buyer b;
    b.id = as_string(field(bj, "id", path), path + ".id");
    const Json& dj = field(bj, "demand", path);
    if (!dj.is_number_integer()) fail(path + ".demand", "expected an integer");
    const auto demand = dj.get<std::int64_t>();
    if (demand < 1 || demand > 1'000'000) fail(path + ".demand", "demand must be a positive integer");
    b.demand = static_cast<int>(demand);

    const Json& vj = field(bj, "values", path);
    if (!vj.is_object()) fail(path + ".values", "expected an object");
    for (auto it = vj.begin(); it != vj.end(); ++it) {
      if (std::find(items.begin(), items.end(), it.key()) == items.end()) {
        fail(path + ".values." + it.key(), "unknown item");
      }
    }
    for (const auto& s : items) {
      const std::string vpath = path + ".values." + s;
      if (!vj.contains(s)) fail(vpath, "missing value entry");
      const std::string raw = as_string(vj.at(s), vpath);
      try {
        b.values.push_back(Rational::parse(raw));
      } catch (const std::invalid_argument&) {
        fail(vpath, "malformed rational '" + raw + "'");
      }
    }
    buyers.push_back(std::move(b));
  }
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key() != "items" && it.key() != "buyers") fail("$." + it.key(), "unknown field");
  }
  return Market(std::move(items), std::move(buyers));
}

std::string serialize_market(const Market& m, int indent) {
  Json doc;
  doc["items"] = Json::array();
  for (const auto& s : m.items()) doc["items"].push_back(s);
  doc["buyers"] = Json::array();
  for (const auto& b : m.buyers()) {
    Json bj;
    bj["id"] = b.id;
    bj["demand"] = b.demand;
    bj["values"] = Json::object();
    for (std::size_t s = 0; s < m.num_items(); ++s) bj["values"][m.items()[s]] = b.values[s].str();
    doc["buyers"].push_back(std::move(bj));
  }
  return doc.dump(indent);
}

Market generate_instance(std::uint64_t seed, const GeneratorConfig& config) {
  if (config.value_min < 1 || config.value_max < config.value_min) {
    throw ContractViolation("generate_instance: value range must be positive and non-empty");
  }
  if (config.demands.empty() || (config.demands.size() != 1 && config.demands.size() != config.buyers)) {
    throw ContractViolation("generate_instance: demand profile needs one entry or one per buyer");
  }
  std::vector<int> demand(config.buyers);
  int total = 0;
  for (std::size_t t = 0; t < config.buyers; ++t) {
    demand[t] = config.demands.size() == 1 ? config.demands[0] : config.demands[t];
    if (demand[t] < 1) throw ContractViolation("generate_instance: demands must be positive");
    total += demand[t];
  }
  std::vector<ItemId> items;
  for (int s = 1; s <= total; ++s) items.push_back("s" + std::to_string(s));

  // Reduced modulo the range instead of a standard distribution: the engine
  // mapping of std::mt19937_64 is fixed, the distributions are not.
  std::mt19937_64 rng(seed);
  const auto span = static_cast<std::uint64_t>(config.value_max - config.value_min) + 1;
  while (true) {
    std::vector<Buyer> buyers;
    for (std::size_t t = 0; t < config.buyers; ++t) {
      Buyer b{"t" + std::to_string(t + 1), demand[t], {}};
      for (int s = 0; s < total; ++s) {
        b.values.emplace_back(config.value_min + static_cast<std::int64_t>(rng() % span));
      }
      buyers.push_back(std::move(b));
    }
    Market m(items, std::move(buyers));
    if (check_opt_property(m).opt_property_holds) return m;
  }
}

}  // namespace dynprice
