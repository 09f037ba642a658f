#include "msftgcn/checkpoint.hpp"

#include <fstream>

#include "json.hpp"
#include "msftgcn/error.hpp"
#include "msftgcn/tns1.hpp"

namespace msftgcn {

using nlohmann::json;

void save_checkpoint(const std::filesystem::path& manifest, const ModelParams& params,
                     const std::string& config_hash) {
  const std::filesystem::path payload_name = manifest.stem().string() + ".tns";
  std::string payload;
  json entries = json::array();
  params.visit([&](const std::string& name, const DenseTensor3& t) {
    const std::string record = encode_tns1(t, Dtype::f64);
    entries.push_back({{"name", name},
                       {"offset", payload.size()},
                       {"bytes", record.size()},
                       {"dims", {t.dims().d1, t.dims().d2, t.dims().d3}}});
    payload += record;
  });
  json j = {{"format", "msftgcn-checkpoint"},
            {"version", 1},
            {"config_hash", config_hash},
            {"payload", payload_name.string()},
            {"params", entries}};
  write_file_bytes(manifest.parent_path() / payload_name, payload);
  write_file_bytes(manifest, j.dump(2) + "\n");
}

ModelParams load_checkpoint(const std::filesystem::path& manifest, const ModelParams& expected) {
  json j;
  try {
    j = json::parse(read_file_bytes(manifest));
  } catch (const json::exception& e) {
    throw ParseError("checkpoint manifest " + manifest.string() + ": " + e.what());
  }
  if (j.value("format", "") != "msftgcn-checkpoint") {
    throw FormatError("not a checkpoint manifest: " + manifest.string(), 0);
  }
  const std::string payload = read_file_bytes(manifest.parent_path() /
                                              j.at("payload").get<std::string>());
  const json& entries = j.at("params");

  ModelParams out = expected;
  const auto names = expected.names();
  auto slots = out.tensors();
  if (entries.size() != slots.size()) {
    throw ConfigError("checkpoint holds " + std::to_string(entries.size()) +
                      " parameters, model expects " + std::to_string(slots.size()));
  }
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const json& e = entries[k];
    const auto name = e.at("name").get<std::string>();
    if (name != names[k]) {
      throw ConfigError("checkpoint parameter #" + std::to_string(k) + " is '" + name +
                        "', model expects '" + names[k] + "'");
    }
    const auto dims = e.at("dims").get<std::vector<std::size_t>>();
    const Dims3 want = slots[k]->dims();
    const Dims3 have = dims.size() == 3 ? Dims3{dims[0], dims[1], dims[2]} : Dims3{};
    if (have != want) {
      throw ConfigError("checkpoint parameter '" + name + "' has dims " + to_string(have) +
                        " but the config expects " + to_string(want));
    }
    const auto offset = e.at("offset").get<std::size_t>();
    Tns1Record rec = decode_tns1_record(payload, offset, Dtype::f64);
    if (rec.tensor.dims() != want) {
      throw FormatError("payload record for '" + name + "' has dims " +
                            to_string(rec.tensor.dims()) + ", manifest says " + to_string(want),
                        offset);
    }
    *slots[k] = std::move(rec.tensor);
  }
  return out;
}

}  // namespace msftgcn
