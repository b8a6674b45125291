#include "darkpool/config.hpp"

#include "darkpool/domain.hpp"
#include "darkpool/error.hpp"
#include "darkpool/fs_util.hpp"
#include "darkpool/hash.hpp"

namespace darkpool {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::kInvalidConfig, what); }

const json& section(const json& j, const char* key) {
  static const json kEmpty = json::object();
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return kEmpty;
  if (!it->is_object()) invalid(std::string(key) + " must be an object");
  return *it;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    invalid(std::string("wrong type for ") + key);
  }
}

std::optional<fs::path> input_path(const json& inputs, const char* key, const fs::path& base) {
  auto it = inputs.find(key);
  if (it == inputs.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) invalid(std::string("inputs.") + key + " must be a path");
  fs::path p = it->get<std::string>();
  if (p.is_relative()) p = base / p;
  p = p.lexically_normal();
  if (!fs::exists(p)) invalid(std::string("inputs.") + key + " does not exist: " + p.string());
  return p;
}

BrandingProfile profile_from(const json& j, BrandingProfile p) {
  p.sender_name = get_or<std::string>(j, "sender_name", p.sender_name);
  p.organization = get_or<std::string>(j, "organization", p.organization);
  p.website = get_or<std::string>(j, "website", p.website);
  p.reply_to = get_or<std::string>(j, "reply_to", p.reply_to);
  return p;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) invalid("config must be a JSON object");
  PipelineConfig c;
  // The workspace location is where artifacts go, not what produced them.
  json identity = j;
  identity.erase("workspace");
  c.hash = sha256_hex(identity.dump());

  fs::path ws = get_or<std::string>(j, "workspace", "workspace");
  c.workspace = (ws.is_relative() ? base_dir / ws : ws).lexically_normal();

  const auto& inputs = section(j, "inputs");
  c.inputs.seeds = input_path(inputs, "seeds", base_dir);
  c.inputs.problematic = input_path(inputs, "problematic", base_dir);
  c.inputs.entities = input_path(inputs, "entities", base_dir);
  c.inputs.popularity = input_path(inputs, "popularity", base_dir);
  c.inputs.har_dir = input_path(inputs, "har_dir", base_dir);
  c.inputs.screenshot_dir = input_path(inputs, "screenshot_dir", base_dir);
  c.inputs.known_advertisers = input_path(inputs, "known_advertisers", base_dir);

  const auto& crawl = section(j, "crawl");
  c.crawl.concurrency = get_or<std::size_t>(crawl, "concurrency", c.crawl.concurrency);
  c.crawl.per_host_delay = std::chrono::milliseconds(
      get_or<long>(crawl, "per_host_delay_ms", static_cast<long>(c.crawl.per_host_delay.count())));
  c.crawl.retries = get_or<int>(crawl, "retries", c.crawl.retries);
  c.crawl.max_rounds = get_or<int>(crawl, "max_rounds", c.crawl.max_rounds);
  c.crawl.max_body_bytes = get_or<std::size_t>(crawl, "max_body_bytes", c.crawl.max_body_bytes);
  c.http.timeout = std::chrono::milliseconds(get_or<long>(crawl, "timeout_ms", static_cast<long>(c.http.timeout.count())));
  c.http.user_agent = get_or<std::string>(crawl, "user_agent", c.http.user_agent);
  c.http.max_body_bytes = c.crawl.max_body_bytes;
  if (c.crawl.concurrency == 0 || c.crawl.max_rounds <= 0 || c.crawl.retries < 0) {
    invalid("crawl.concurrency and crawl.max_rounds must be positive, crawl.retries non-negative");
  }

  const auto& transport = section(j, "transport");
  const auto kind = get_or<std::string>(transport, "kind", "http");
  if (kind == "http") {
    c.transport = TransportKind::kHttp;
  } else if (kind == "directory") {
    c.transport = TransportKind::kDirectory;
    fs::path root = get_or<std::string>(transport, "root", "");
    if (root.empty()) invalid("transport.root is required for the directory transport");
    c.web_root = (root.is_relative() ? base_dir / root : root).lexically_normal();
    if (!fs::is_directory(c.web_root)) invalid("transport.root does not exist: " + c.web_root.string());
  } else {
    invalid("transport.kind must be \"http\" or \"directory\"");
  }
  c.http.host_overrides = get_or<std::map<std::string, std::string>>(transport, "host_overrides", {});
  c.http.verify_tls = get_or<bool>(transport, "verify_tls", true);

  const auto& evidence = section(j, "evidence");
  c.evidence.min_seller_id_length = get_or<std::size_t>(evidence, "min_seller_id_length", 4);
  if (auto it = evidence.find("key_allowlist"); it != evidence.end() && !it->is_null()) {
    std::set<std::string> keys;
    for (const auto& k : *it) keys.insert(to_lower(k.get<std::string>()));
    c.evidence.key_allowlist = std::move(keys);
  }

  const auto& contacts = section(j, "contacts");
  const auto prober = get_or<std::string>(contacts, "prober", "none");
  if (prober != "none" && prober != "stub") invalid("contacts.prober must be \"none\" or \"stub\"");
  c.probe_common_prefixes = prober == "stub";
  for (const auto& d : get_or<std::vector<std::string>>(contacts, "deliverable", {})) c.deliverable.insert(to_lower(d));

  const auto& campaign = section(j, "campaign");
  c.seed = get_or<std::uint64_t>(campaign, "seed", c.seed);
  c.recipients.top_k = get_or<std::size_t>(campaign, "top_k", c.recipients.top_k);
  const auto basis = get_or<std::string>(campaign, "ad_network_basis", "issued");
  if (basis != "issued" && basis != "issued_or_owned") invalid("campaign.ad_network_basis must be issued or issued_or_owned");
  c.recipients.ad_network_basis = basis == "issued" ? AdNetworkBasis::kIssued : AdNetworkBasis::kIssuedOrOwned;
  c.schedule.reminder = Days(get_or<int>(campaign, "reminder_days", 10));
  c.schedule.post_window_start = Days(get_or<int>(campaign, "post_window_start_days", 28));
  c.schedule.post_window_end = Days(get_or<int>(campaign, "post_window_end_days", 35));
  c.windows.pre_min = Days(get_or<int>(campaign, "pre_window_min_days", 7));
  c.windows.pre_max = Days(get_or<int>(campaign, "pre_window_max_days", 14));
  c.windows.post_min = c.schedule.post_window_start;
  c.windows.post_max = c.schedule.post_window_end;
  c.max_report_instances = get_or<std::size_t>(campaign, "max_report_instances", 25);
  const auto& branding = section(campaign, "branding");
  c.branding[Branding::kAcademic] = profile_from(section(branding, "academic"), {});
  c.branding[Branding::kActivist] = profile_from(section(branding, "activist"), {});

  const auto dispatch = get_or<std::string>(j, "dispatch", "dry-run");
  if (dispatch != "dry-run" && dispatch != "live") invalid("dispatch must be \"dry-run\" or \"live\"");
  c.live_dispatch = dispatch == "live";

  if (auto it = j.find("clock"); it != j.end() && !it->is_null()) {
    c.fixed_time = parse_timestamp(it->get<std::string>());
    if (!c.fixed_time) invalid("clock must be an ISO-8601 UTC timestamp");
  }
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path, const json& overrides) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    invalid(e.what());
  }
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) invalid("config is not valid JSON: " + path.string());
  if (!j.is_object()) invalid("config must be a JSON object");
  j.merge_patch(overrides);
  auto c = from_json(j, fs::absolute(path).parent_path());
  c.source = path;
  return c;
}

std::vector<std::string> read_domain_list(const fs::path& path) {
  std::vector<std::string> out;
  const auto text = read_file(path);
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line(text.data() + pos, (nl == std::string::npos ? text.size() : nl) - pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (auto comma = line.rfind(','); comma != std::string_view::npos) line = trim(line.substr(comma + 1));
    if (auto d = normalize_domain(line); !d.empty() && d != "domain") out.push_back(d);
  }
  return out;
}

std::unique_ptr<Transport> make_transport(const PipelineConfig& config, const std::string& snapshot_id) {
  if (config.transport == TransportKind::kDirectory) {
    const auto dated = config.web_root / snapshot_id;
    if (!snapshot_id.empty() && fs::is_directory(dated)) return std::make_unique<DirectoryTransport>(dated);
    return std::make_unique<DirectoryTransport>(config.web_root);
  }
  return std::make_unique<HttpTransport>(config.http);
}

}  // namespace darkpool
