#include "gpb/bench/checkpoint.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <json.hpp>

#include "gpb/error.hpp"

namespace gpb::bench {

using nlohmann::json;

namespace {

template <class T>
void put(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
}

template <class T>
T get(std::string_view in, std::size_t at) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::uint64_t(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return static_cast<T>(v);
}

std::uint32_t crc(std::string_view bytes) {
  uLong c = crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(crc32(c, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

constexpr std::size_t kHeader = 8 + 4 + 1 + 8 + 8;

json matrix_json(const ad::Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.values().begin(), m.values().end())}};
}

ad::Matrix matrix_from(const json& j) {
  ad::Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != m.size()) throw IntegrityError("checkpoint matrix has the wrong element count");
  std::copy(data.begin(), data.end(), m.values().begin());
  return m;
}

json tensor_json(const ad::Tensor& t) { return t.defined() ? matrix_json(t.value()) : json(nullptr); }

ad::Tensor tensor_from(const json& j) { return j.is_null() ? ad::Tensor{} : ad::Tensor::parameter(matrix_from(j)); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError("cannot open checkpoint " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

template <class T>
Loaded<T> finish(T value, const Container& c, std::optional<std::uint64_t> expected) {
  Loaded<T> out{std::move(value), c.config_hash, false};
  out.hash_mismatch = expected && *expected != c.config_hash;
  return out;
}

json parse_payload(const Container& c, ArtifactKind want) {
  if (c.kind != want)
    throw IntegrityError("checkpoint holds a " + to_string(c.kind) + ", expected " + to_string(want));
  try {
    return json::parse(c.payload);
  } catch (const json::exception& e) {
    throw IntegrityError(std::string("checkpoint payload is not valid JSON: ") + e.what());
  }
}

}  // namespace

std::string to_string(ArtifactKind k) { return k == ArtifactKind::encoder ? "encoder" : "prompt"; }

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string encode_container(const Container& c) {
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  put<std::uint32_t>(out, c.version);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(c.kind));
  put<std::uint64_t>(out, c.config_hash);
  put<std::uint64_t>(out, c.payload.size());
  out += c.payload;
  put<std::uint32_t>(out, crc(out));
  return out;
}

Container decode_container(std::string_view bytes) {
  if (bytes.size() < kHeader + 4) throw IntegrityError("checkpoint truncated: header incomplete");
  if (std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
    throw IntegrityError("not a checkpoint: bad magic bytes");
  Container c;
  c.version = get<std::uint32_t>(bytes, 8);
  const auto kind = get<std::uint8_t>(bytes, 12);
  c.config_hash = get<std::uint64_t>(bytes, 13);
  const auto length = get<std::uint64_t>(bytes, 21);
  if (bytes.size() - kHeader - 4 != length)
    throw IntegrityError("checkpoint truncated: payload length " + std::to_string(length) + " does not match file size");
  const auto stored = get<std::uint32_t>(bytes, kHeader + length);
  if (stored != crc(bytes.substr(0, kHeader + length))) throw IntegrityError("checkpoint checksum mismatch");
  if (c.version != kCheckpointVersion)
    throw IntegrityError("unsupported checkpoint version " + std::to_string(c.version));
  if (kind != 1 && kind != 2) throw IntegrityError("unknown artifact kind " + std::to_string(kind));
  c.kind = static_cast<ArtifactKind>(kind);
  c.payload = std::string(bytes.substr(kHeader, length));
  return c;
}

void save_encoder(const std::filesystem::path& path, const model::PretrainedEncoder& enc, std::uint64_t config_hash) {
  const auto& b = enc.config();
  json weights = json::array();
  for (const auto& w : enc.weights()) weights.push_back(matrix_json(w));
  json payload = {{"backbone",
                   {{"input_dim", b.input_dim},
                    {"hidden_dim", b.hidden_dim},
                    {"num_layers", b.num_layers},
                    {"with_projection_head", b.with_projection_head}}},
                  {"pretext", enc.pretext()},
                  {"weights", weights}};
  write_file(path, encode_container({ArtifactKind::encoder, kCheckpointVersion, config_hash, payload.dump()}));
}

Loaded<model::PretrainedEncoder> load_encoder(const std::filesystem::path& path,
                                              std::optional<std::uint64_t> expected_hash) {
  const auto c = decode_container(read_file(path));
  const auto j = parse_payload(c, ArtifactKind::encoder);
  try {
    model::BackboneConfig b;
    const auto& jb = j.at("backbone");
    b.input_dim = jb.at("input_dim");
    b.hidden_dim = jb.at("hidden_dim");
    b.num_layers = jb.at("num_layers");
    b.with_projection_head = jb.at("with_projection_head");
    std::vector<ad::Matrix> weights;
    for (const auto& w : j.at("weights")) weights.push_back(matrix_from(w));
    return finish(model::PretrainedEncoder(b, std::move(weights), j.at("pretext")), c, expected_hash);
  } catch (const json::exception& e) {
    throw IntegrityError(std::string("malformed encoder checkpoint: ") + e.what());
  }
}

void save_prompt(const std::filesystem::path& path, const PromptArtifact& artifact, std::uint64_t config_hash) {
  const auto& p = artifact.tuned.prompt;
  const auto& h = artifact.tuned.head;
  json payload = {
      {"pretext", artifact.pretext},
      {"method", prompt::to_string(p.method)},
      {"prompt", {{"tokens", tensor_json(p.tokens)}, {"attention", tensor_json(p.attention)}, {"threshold", p.threshold}}},
      {"head",
       {{"kind", prompt::to_string(h.kind)},
        {"num_classes", h.num_classes},
        {"weight", tensor_json(h.weight)},
        {"prototypes", matrix_json(h.prototypes)},
        {"groups", h.groups},
        {"temperature", h.temperature}}},
      {"loss_trace", artifact.tuned.loss_trace}};
  write_file(path, encode_container({ArtifactKind::prompt, kCheckpointVersion, config_hash, payload.dump()}));
}

Loaded<PromptArtifact> load_prompt(const std::filesystem::path& path, std::optional<std::uint64_t> expected_hash) {
  const auto c = decode_container(read_file(path));
  const auto j = parse_payload(c, ArtifactKind::prompt);
  try {
    PromptArtifact a;
    a.pretext = j.at("pretext");
    auto& p = a.tuned.prompt;
    p.method = prompt::parse_method(j.at("method"));
    p.tokens = tensor_from(j.at("prompt").at("tokens"));
    p.attention = tensor_from(j.at("prompt").at("attention"));
    p.threshold = j.at("prompt").at("threshold");
    auto& h = a.tuned.head;
    const auto& jh = j.at("head");
    const std::string kind = jh.at("kind");
    if (kind == "linear") h.kind = prompt::HeadKind::linear;
    else if (kind == "prototypes") h.kind = prompt::HeadKind::prototypes;
    else if (kind == "task_tokens") h.kind = prompt::HeadKind::task_tokens;
    else throw IntegrityError("unknown head kind '" + kind + "'");
    h.num_classes = jh.at("num_classes");
    h.weight = tensor_from(jh.at("weight"));
    h.prototypes = matrix_from(jh.at("prototypes"));
    h.groups = jh.at("groups").get<std::vector<std::vector<std::size_t>>>();
    h.temperature = jh.at("temperature");
    a.tuned.loss_trace = j.at("loss_trace").get<std::vector<double>>();
    return finish(std::move(a), c, expected_hash);
  } catch (const json::exception& e) {
    throw IntegrityError(std::string("malformed prompt checkpoint: ") + e.what());
  }
}

}  // namespace gpb::bench
