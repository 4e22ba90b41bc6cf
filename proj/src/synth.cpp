#include "shellsig/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "shellsig/errors.hpp"
#include "shellsig/featurizer.hpp"

namespace shellsig {

std::string_view scaffold_transform_name(ScaffoldTransform t) {
  switch (t) {
    case ScaffoldTransform::permissive: return "permissive";
    case ScaffoldTransform::phased: return "phased";
    case ScaffoldTransform::one_command_per_turn: return "one_command_per_turn";
  }
  return "permissive";
}

ScaffoldTransform scaffold_transform_from_name(std::string_view name) {
  if (name == "permissive") return ScaffoldTransform::permissive;
  if (name == "phased") return ScaffoldTransform::phased;
  if (name == "one_command_per_turn") return ScaffoldTransform::one_command_per_turn;
  throw SchemaError("unknown scaffold transform: '" + std::string(name) + "'");
}

void validate(const CorpusSpec& spec) {
  if (spec.families.empty()) throw ValidationError("corpus spec: no family profiles");
  if (spec.scaffolds.empty()) throw ValidationError("corpus spec: no scaffolds");
  if (spec.sessions_per_cell < 1)
    throw ValidationError("corpus spec: sessions_per_cell must be >= 1");
  if (spec.commands_min < 1 || spec.commands_max < spec.commands_min)
    throw ValidationError("corpus spec: bad commands_per_session range");
  if (spec.overlap < 0.0 || spec.overlap > 1.0)
    throw ValidationError("corpus spec: overlap must be in [0, 1]");
  for (const FamilyProfile& p : spec.families) {
    if (p.family.empty()) throw ValidationError("corpus spec: empty family label");
    if (p.idiom_commands.empty())
      throw ValidationError("corpus spec: family '" + p.family + "' has no idioms");
    if (p.idiom_rate < 0.0 || p.idiom_rate > 1.0)
      throw ValidationError("corpus spec: idiom_rate must be in [0, 1]");
  }
  if (spec.overlap_pair) {
    for (const std::string& f : {spec.overlap_pair->first, spec.overlap_pair->second}) {
      bool known = std::any_of(spec.families.begin(), spec.families.end(),
                               [&](const FamilyProfile& p) { return p.family == f; });
      if (!known)
        throw ValidationError("corpus spec: overlap pair names unknown family '" + f + "'");
    }
  }
}

namespace {

// Deterministic draws built straight from the mt19937_64 stream; std::
// distributions are implementation-defined and would tie corpora to one
// standard library.
struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform() {  // [0, 1)
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
  }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(gen() % n); }
  int range(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(gen() % static_cast<std::uint64_t>(hi - lo + 1));
  }
};

const WeightedCommand& weighted_pick(const std::vector<WeightedCommand>& pool, Rng& rng) {
  double total = 0.0;
  for (const WeightedCommand& c : pool) total += c.weight;
  double r = rng.uniform() * total;
  for (const WeightedCommand& c : pool) {
    r -= c.weight;
    if (r < 0.0) return c;
  }
  return pool.back();
}

struct GenContext {
  const std::vector<WeightedCommand>* bleed_pool = nullptr;  // merged idiom pool
  double overlap = 0.0;
};

Session generate_session_impl(const FamilyProfile& profile,
                              const ScaffoldSpec& scaffold,
                              int length,
                              std::uint64_t seed,
                              const GenContext& ctx) {
  if (length < 1) throw ValidationError("generate_session: length must be >= 1");
  Rng rng(seed);

  std::vector<std::string> commands;
  commands.reserve(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) {
    if (i == 0 && profile.opener) {
      commands.push_back(*profile.opener);
      continue;
    }
    std::string cmd;
    if (rng.uniform() < profile.idiom_rate) {
      const std::vector<WeightedCommand>* pool = &profile.idiom_commands;
      if (ctx.bleed_pool && !ctx.bleed_pool->empty() && rng.uniform() < ctx.overlap)
        pool = ctx.bleed_pool;
      cmd = weighted_pick(*pool, rng).text;
    } else if (!profile.shared_commands.empty()) {
      cmd = weighted_pick(profile.shared_commands, rng).text;
    } else {
      cmd = weighted_pick(profile.idiom_commands, rng).text;
    }
    commands.push_back(std::move(cmd));
  }
  if (scaffold.suppress_idioms) {
    for (std::string& c : commands) c = command_verb(c);
  }

  Session s;
  s.family = profile.family;
  s.scaffold = scaffold.label;
  s.dataset = DatasetTag::clean;
  s.is_dpi = false;
  s.model = profile.family + "/synthetic";
  s.elapsed_seconds = 30.0 + 4.5 * static_cast<double>(length);

  std::int64_t turn = 0;
  auto push_plan = [&](const std::string& note) {
    Entry e;
    e.turn = turn++;
    e.reasoning = note;
    e.type = EntryType::plan;
    s.entries.push_back(std::move(e));
  };
  auto push_command = [&](std::string cmd) {
    Entry e;
    e.turn = turn++;
    e.command = std::move(cmd);
    e.output = "";
    e.type = EntryType::tool_call;
    s.entries.push_back(std::move(e));
  };

  switch (scaffold.transform) {
    case ScaffoldTransform::permissive:
      for (std::string& c : commands) push_command(std::move(c));
      break;
    case ScaffoldTransform::phased: {
      // Plan entries at thirds-of-session phase boundaries.
      int n = static_cast<int>(commands.size());
      int phase = std::max(1, (n + 2) / 3);
      for (int i = 0; i < n; ++i) {
        if (i % phase == 0) push_plan("phase " + std::to_string(i / phase + 1));
        push_command(std::move(commands[static_cast<std::size_t>(i)]));
      }
      break;
    }
    case ScaffoldTransform::one_command_per_turn:
      for (std::string& c : commands) {
        push_plan("");
        push_command(std::move(c));
      }
      break;
  }
  s.num_bash_entries = command_count(s);
  return s;
}

std::string zero_pad(int value, int width) {
  std::string v = std::to_string(value);
  if (static_cast<int>(v.size()) < width)
    v.insert(v.begin(), static_cast<std::size_t>(width) - v.size(), '0');
  return v;
}

std::string lower(std::string s) {
  for (char& c : s)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
  return s;
}

}  // namespace

Session generate_session(const FamilyProfile& profile,
                         const ScaffoldSpec& scaffold,
                         int length,
                         std::uint64_t seed) {
  return generate_session_impl(profile, scaffold, length, seed, {});
}

Corpus generate_corpus(const CorpusSpec& spec) {
  validate(spec);

  // Merged bleed pools: for a designated pair, both partners share one
  // merged pool; otherwise every family bleeds from the union of all pools.
  std::vector<WeightedCommand> merged_all;
  std::vector<WeightedCommand> merged_pair;
  for (const FamilyProfile& p : spec.families) {
    for (const WeightedCommand& c : p.idiom_commands) {
      merged_all.push_back(c);
      if (spec.overlap_pair &&
          (p.family == spec.overlap_pair->first || p.family == spec.overlap_pair->second))
        merged_pair.push_back(c);
    }
  }

  std::vector<Session> sessions;
  sessions.reserve(spec.families.size() * spec.scaffolds.size() *
                   static_cast<std::size_t>(spec.sessions_per_cell));
  for (std::size_t fi = 0; fi < spec.families.size(); ++fi) {
    const FamilyProfile& profile = spec.families[fi];
    GenContext ctx;
    if (spec.overlap > 0.0) {
      if (spec.overlap_pair) {
        if (profile.family == spec.overlap_pair->first ||
            profile.family == spec.overlap_pair->second) {
          ctx.bleed_pool = &merged_pair;
          ctx.overlap = spec.overlap;
        }
      } else {
        ctx.bleed_pool = &merged_all;
        ctx.overlap = spec.overlap;
      }
    }
    for (std::size_t si = 0; si < spec.scaffolds.size(); ++si) {
      const ScaffoldSpec& scaffold = spec.scaffolds[si];
      for (int n = 0; n < spec.sessions_per_cell; ++n) {
        std::uint64_t cell_seed =
            mix_seed(spec.seed, (fi * 1000003 + si) * 1000003 + static_cast<std::uint64_t>(n));
        Rng len_rng(mix_seed(cell_seed, 0x1e7));
        int length = len_rng.range(spec.commands_min, spec.commands_max);
        Session s = generate_session_impl(profile, scaffold, length, cell_seed, ctx);
        s.session_id = lower(scaffold.label) + "_" + profile.family + "_" + zero_pad(n, 3);
        sessions.push_back(std::move(s));
      }
    }
  }
  return make_corpus(std::move(sessions));
}

CorpusSpec default_spec() {
  CorpusSpec spec;
  spec.seed = 42;
  spec.sessions_per_cell = 50;
  spec.commands_min = 8;
  spec.commands_max = 25;

  const std::vector<WeightedCommand> shared = {
      {"whoami", 1.0},
      {"pwd", 1.0},
      {"ls -la", 1.0},
      {"uname -a", 1.0},
      {"cat /etc/passwd", 1.0},
      {"cat /etc/os-release", 0.7},
      {"ps aux", 0.7},
      {"ss -tlnp", 0.5},
      {"env", 0.5},
      {"sudo -l", 0.5},
  };

  auto family = [&](std::string name, std::vector<WeightedCommand> idioms,
                    std::optional<std::string> opener = std::nullopt) {
    FamilyProfile p;
    p.family = std::move(name);
    p.idiom_commands = std::move(idioms);
    p.shared_commands = shared;
    p.idiom_rate = 0.6;
    p.opener = std::move(opener);
    return p;
  };

  // Signature idioms are chosen so each family owns at least one bigram no
  // other profile produces (deep recursive find with depth caps; find+exec
  // grep pipelines; recursive grep flags; verb-only chained openers; sed/
  // printf line surgery; parallel semicolon-chained finds; CJK annotations).
  spec.families.push_back(family(
      "claude-opus",
      {{"find / -maxdepth 3 -type d 2>/dev/null", 1.2},
       {"find /etc -maxdepth 2 -type f 2>/dev/null", 1.0},
       {"head -c 512 /home/ctfplayer/flag.txt", 0.8},
       {"timeout 10 find /var -maxdepth 2 -type d", 0.6},
       {"getcap -r / 2>/dev/null", 0.6}}));
  spec.families.push_back(family(
      "deepseek",
      {{"find . -type f -exec grep -l FLAG {} ;", 1.2},
       {"find /home -type f -exec grep -i flag {} ;", 1.0},
       {"find /etc -type f -exec grep -n password {} ;", 0.8},
       {"find /var/log -type f -exec grep -c error {} ;", 0.6}}));
  spec.families.push_back(family(
      "gemini-3.1",
      {{"grep -rn FLAG /home 2>/dev/null", 1.2},
       {"grep -rn password /etc 2>/dev/null", 1.0},
       {"du -sh /var/log 2>/dev/null", 0.8},
       {"stat -c %a:%U /etc/shadow", 0.6}}));
  spec.families.push_back(family(
      "glm-5",
      {{"id; hostname", 1.0},
       {"ls /home; ls /root 2>/dev/null", 1.0},
       {"cat /etc/group; cat /etc/hosts", 0.8},
       {"date; uptime", 0.6}},
      "id; pwd"));
  spec.families.push_back(family(
      "gpt-5.4",
      {{"sed -n 1p /home/ctfplayer/flag.txt", 1.2},
       {"sed -n 1,20p /etc/passwd", 1.0},
       {"printf %s\\\\n $(ls /home)", 1.0},
       {"printf 'uid: %s\\n' $(id -u)", 0.6}}));
  spec.families.push_back(family(
      "kimi",
      {{"find /home -maxdepth 2 -name flag.txt; find /var -maxdepth 2 -name flag.txt", 1.2},
       {"find /opt -name *.sh; find /srv -name *.sh", 1.0},
       {"ls /tmp; ls /var/tmp; ls /dev/shm", 0.8},
       {"find /usr/local -maxdepth 2 -name *.conf; find /etc -maxdepth 1 -name *.conf", 0.6}}));
  spec.families.push_back(family(
      "qwen",
      {{"echo '开始 枚举 系统信息'; uname -r", 1.2},
       {"grep -r '密码' /etc 2>/dev/null", 1.0},
       {"echo '查找 标志文件'; ls /home", 1.0},
       {"cat /etc/passwd | grep -v nologin  # 查看 用户列表", 0.6}}));

  spec.scaffolds = {
      {"CC", ScaffoldTransform::permissive, false},
      {"PGPT", ScaffoldTransform::phased, false},
      {"ReAct", ScaffoldTransform::one_command_per_turn, false},
  };
  return spec;
}

Json spec_to_json(const CorpusSpec& spec) {
  Json j;
  j["seed"] = spec.seed;
  j["sessions_per_cell"] = spec.sessions_per_cell;
  j["commands_per_session"] = {spec.commands_min, spec.commands_max};
  j["overlap"] = spec.overlap;
  if (spec.overlap_pair)
    j["overlap_pair"] = {spec.overlap_pair->first, spec.overlap_pair->second};
  Json scaffolds = Json::array();
  for (const ScaffoldSpec& s : spec.scaffolds) {
    scaffolds.push_back({{"label", s.label},
                         {"transform", std::string(scaffold_transform_name(s.transform))},
                         {"suppress_idioms", s.suppress_idioms}});
  }
  j["scaffolds"] = std::move(scaffolds);
  Json families = Json::array();
  auto commands_json = [](const std::vector<WeightedCommand>& pool) {
    Json arr = Json::array();
    for (const WeightedCommand& c : pool)
      arr.push_back({{"text", c.text}, {"weight", c.weight}});
    return arr;
  };
  for (const FamilyProfile& p : spec.families) {
    Json f;
    f["family"] = p.family;
    f["idiom_rate"] = p.idiom_rate;
    if (p.opener) f["opener"] = *p.opener;
    f["idiom_commands"] = commands_json(p.idiom_commands);
    f["shared_commands"] = commands_json(p.shared_commands);
    families.push_back(std::move(f));
  }
  j["families"] = std::move(families);
  return j;
}

CorpusSpec spec_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("corpus spec must be a JSON object");
  CorpusSpec spec;
  if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("sessions_per_cell"))
    spec.sessions_per_cell = j["sessions_per_cell"].get<int>();
  if (j.contains("commands_per_session")) {
    const Json& r = j["commands_per_session"];
    if (!r.is_array() || r.size() != 2)
      throw SchemaError("commands_per_session must be [min, max]");
    spec.commands_min = r[0].get<int>();
    spec.commands_max = r[1].get<int>();
  }
  if (j.contains("overlap")) spec.overlap = j["overlap"].get<double>();
  if (j.contains("overlap_pair")) {
    const Json& p = j["overlap_pair"];
    if (!p.is_array() || p.size() != 2)
      throw SchemaError("overlap_pair must be [family, family]");
    spec.overlap_pair = {p[0].get<std::string>(), p[1].get<std::string>()};
  }
  auto commands_from = [](const Json& arr) {
    std::vector<WeightedCommand> out;
    for (const Json& c : arr) {
      WeightedCommand wc;
      wc.text = c.at("text").get<std::string>();
      if (c.contains("weight")) wc.weight = c["weight"].get<double>();
      out.push_back(std::move(wc));
    }
    return out;
  };
  if (j.contains("scaffolds")) {
    for (const Json& s : j["scaffolds"]) {
      ScaffoldSpec sc;
      sc.label = s.at("label").get<std::string>();
      if (s.contains("transform"))
        sc.transform = scaffold_transform_from_name(s["transform"].get<std::string>());
      if (s.contains("suppress_idioms"))
        sc.suppress_idioms = s["suppress_idioms"].get<bool>();
      spec.scaffolds.push_back(std::move(sc));
    }
  }
  if (j.contains("families")) {
    for (const Json& f : j["families"]) {
      FamilyProfile p;
      p.family = f.at("family").get<std::string>();
      if (f.contains("idiom_rate")) p.idiom_rate = f["idiom_rate"].get<double>();
      if (f.contains("opener")) p.opener = f["opener"].get<std::string>();
      if (f.contains("idiom_commands")) p.idiom_commands = commands_from(f["idiom_commands"]);
      if (f.contains("shared_commands")) p.shared_commands = commands_from(f["shared_commands"]);
      spec.families.push_back(std::move(p));
    }
  }
  validate(spec);
  return spec;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const Session& s : corpus.sessions)
    atomic_write_file(dir / (s.session_id + ".json"), serialize_session(s));
}

}  // namespace shellsig
