#include "astseq/bundle.hpp"

#include <stdexcept>

#include "json.hpp"

namespace astseq {

using nlohmann::json;

namespace {

constexpr std::string_view kFormat = "astseq-bundle";
constexpr int kVersion = 1;

json texts(const std::vector<FrameToken>& seq) {
  json a = json::array();
  for (const auto& t : seq) a.push_back(t.text);
  return a;
}

}  // namespace

std::string bundle_to_text(const SubsequenceBundle& b) {
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["s1"] = texts(b.s1);
  j["s2"] = texts(b.s2);
  j["s3"] = texts(b.s3);
  json s4 = json::array(), cats = json::array();
  for (const auto& t : b.s4) {
    s4.push_back(t.text);
    cats.push_back(category_name(t.category));
  }
  j["s4"] = std::move(s4);
  j["s4_categories"] = std::move(cats);
  j["s1_index"] = b.s1_index;
  j["s2_index"] = b.s2_index;
  json layout = json::array();
  for (std::size_t i = 0; i < b.s3.size(); ++i)
    if (b.s3[i].newline) layout.push_back({i, b.s3[i].indent});
  j["layout"] = std::move(layout);
  j["name_map"] = b.name_map;
  return j.dump(1) + "\n";
}

SubsequenceBundle bundle_from_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("bundle: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kFormat) throw std::runtime_error("bundle: not an astseq bundle");
  if (j.value("version", 0) != kVersion) throw std::runtime_error("bundle: unsupported version");
  SubsequenceBundle b;
  try {
    for (auto& s : j.at("s3").get<std::vector<std::string>>()) b.s3.push_back({std::move(s), false, 0});
    auto s4 = j.at("s4").get<std::vector<std::string>>();
    auto cats = j.at("s4_categories").get<std::vector<std::string>>();
    if (cats.size() != s4.size()) throw std::runtime_error("bundle: s4 and s4_categories differ in length");
    for (std::size_t i = 0; i < s4.size(); ++i) b.s4.push_back({std::move(s4[i]), parse_category(cats[i])});
    for (const auto& l : j.at("layout")) {
      auto i = l.at(0).get<std::size_t>();
      if (i >= b.s3.size()) throw std::runtime_error("bundle: layout index out of range");
      b.s3[i].newline = true;
      b.s3[i].indent = l.at(1).get<int>();
    }
    b.s1_index = j.at("s1_index").get<std::vector<std::size_t>>();
    b.s2_index = j.at("s2_index").get<std::vector<std::size_t>>();
    auto s1 = j.at("s1").get<std::vector<std::string>>();
    auto s2 = j.at("s2").get<std::vector<std::string>>();
    // s1/s2 are stored as text but taken from s3 so layout flags carry over
    auto pick = [&](const std::vector<std::string>& txt, const std::vector<std::size_t>& idx,
                    std::vector<FrameToken>& out) {
      if (txt.size() != idx.size()) throw std::runtime_error("bundle: subsequence and index lengths differ");
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] >= b.s3.size() || b.s3[idx[k]].text != txt[k])
          throw std::runtime_error("bundle: subsequence token does not match s3 at its index");
        out.push_back(b.s3[idx[k]]);
      }
    };
    pick(s1, b.s1_index, b.s1);
    pick(s2, b.s2_index, b.s2);
    b.name_map = j.at("name_map").get<std::vector<std::pair<std::string, std::string>>>();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("bundle: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("bundle: ") + e.what());
  }
  return b;
}

}  // namespace astseq
