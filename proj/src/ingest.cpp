#include "deckeval/ingest.hpp"

#include <future>
#include <map>
#include <regex>

#include "deckeval/errors.hpp"
#include "deckeval/gateway.hpp"
#include "deckeval/prompts.hpp"
#include "deckeval/text.hpp"

namespace deckeval {

namespace {

std::string strip_quotes(std::string s) {
  s = text::trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = text::trim(std::string_view(s).substr(1, s.size() - 2));
  }
  return s;
}

bool is_sentinel(const std::string& s, std::string_view sentinel) {
  std::string_view v(s);
  if (!v.empty() && v.back() == '.') v.remove_suffix(1);
  return text::equals_ci(text::trim(v), sentinel);
}

std::string first_sentence(const std::string& s) {
  auto pos = s.find(". ");
  if (pos == std::string::npos) return s;
  return s.substr(0, pos + 1);
}

std::string strip_trailing_separators(std::string s) {
  s = text::trim(s);
  while (!s.empty() && (s.back() == ',' || s.back() == ';')) {
    s.pop_back();
    s = text::trim(s);
  }
  return s;
}

struct Located {
  DocumentNode* node;
  std::string path;
};

void collect_preorder(DocumentNode& node, const std::string& path, std::vector<Located>& out) {
  out.push_back({&node, path});
  for (auto& child : node.children) collect_preorder(child, path + "/" + child.title, out);
}

void flatten_into(const DocumentNode& node, const std::string& path, std::vector<std::string>& parts) {
  if (!node.summary) throw ContractError("node '" + path + "' has no summary");
  if (!node.summary->empty()) parts.push_back(*node.summary);
  for (const auto& child : node.children) flatten_into(child, path + "/" + child.title, parts);
}

void headings_into(const DocumentNode& node, std::vector<std::string>& out) {
  for (const auto& child : node.children) {
    out.push_back(child.title);
    headings_into(child, out);
  }
}

std::string path_key(const std::vector<std::string>& path) {
  std::string key;
  for (const auto& p : path) {
    key += p;
    key.push_back('\x1f');
  }
  return key;
}

}  // namespace

Slide extract_slide_features(std::string_view text_response, std::string_view image_response,
                             std::optional<std::string> title_override) {
  Slide slide;

  auto text_resp = strip_quotes(std::string(text_response));
  if (text_resp.empty()) throw IngestError("empty text extraction response", std::string(text_response));
  const bool no_text = is_sentinel(text_resp, "No Text");

  if (title_override && !text::trim(*title_override).empty()) {
    slide.title = text::trim(*title_override);
    slide.text_summary = no_text ? "" : text_resp;
  } else {
    if (no_text) throw IngestError("slide has no text and no title override", std::string(text_response));
    auto nl = text_resp.find('\n');
    if (nl == std::string::npos) {
      slide.title = text_resp;
      slide.text_summary = text_resp;
    } else {
      slide.title = text::trim(std::string_view(text_resp).substr(0, nl));
      slide.text_summary = text::trim(std::string_view(text_resp).substr(nl + 1));
    }
  }

  auto image_resp = strip_quotes(std::string(image_response));
  if (image_resp.empty()) throw IngestError("empty image extraction response", std::string(image_response));
  if (!is_sentinel(image_resp, "No Images")) {
    static const std::regex marker(R"(Image\s*(\d+)\s*:)", std::regex::icase);
    std::vector<std::smatch> marks;
    for (auto it = std::sregex_iterator(image_resp.begin(), image_resp.end(), marker); it != std::sregex_iterator();
         ++it) {
      marks.push_back(*it);
    }
    std::vector<std::string> descriptions;
    if (marks.empty()) {
      descriptions.push_back(image_resp);
    } else {
      if (!text::trim(image_resp.substr(0, static_cast<std::size_t>(marks.front().position()))).empty()) {
        throw IngestError("text before the first ImageK: marker", std::string(image_response));
      }
      for (std::size_t k = 0; k < marks.size(); ++k) {
        if (std::stoul(marks[k][1].str()) != k + 1) {
          throw IngestError("ImageK: markers are not numbered 1, 2, ...", std::string(image_response));
        }
        auto begin = static_cast<std::size_t>(marks[k].position() + marks[k].length());
        auto end = k + 1 < marks.size() ? static_cast<std::size_t>(marks[k + 1].position()) : image_resp.size();
        auto desc = strip_trailing_separators(image_resp.substr(begin, end - begin));
        if (desc.empty()) throw IngestError("empty description after Image" + std::to_string(k + 1) + ":", std::string(image_response));
        descriptions.push_back(std::move(desc));
      }
    }
    for (auto& d : descriptions) {
      slide.image_captions.push_back(first_sentence(d));
      slide.image_descriptions.push_back(std::move(d));
    }
  }

  slide.validate();
  return slide;
}

Document build_document_tree(const std::string& document_id, const std::vector<RawSectionExtract>& extracts) {
  if (extracts.empty()) throw DegenerateInputError("document '" + document_id + "' has no sections");
  Document doc;
  doc.id = document_id;
  doc.root.title = document_id;

  // Route of child indices from the root to each known section.
  std::map<std::string, std::vector<std::size_t>> routes;
  routes.emplace(path_key({}), std::vector<std::size_t>{});

  for (const auto& ex : extracts) {
    auto parent_route = routes.find(path_key(ex.heading_path));
    if (parent_route == routes.end()) {
      auto orphan = text::join(ex.heading_path, "/");
      throw StructureError("section '" + ex.heading + "' refers to unknown parent path '" + orphan + "'", orphan);
    }
    auto full = ex.heading_path;
    full.push_back(ex.heading);
    auto key = path_key(full);
    if (routes.count(key)) {
      auto dup = text::join(full, "/");
      throw StructureError("duplicate section path '" + dup + "'", dup);
    }
    DocumentNode* parent = &doc.root;
    for (auto idx : parent_route->second) parent = &parent->children[idx];
    parent->children.push_back(DocumentNode{ex.heading, ex.body, std::nullopt, {}});
    auto route = parent_route->second;
    route.push_back(parent->children.size() - 1);
    routes.emplace(std::move(key), std::move(route));
  }
  return doc;
}

Summarizer gateway_summarizer(Gateway& gateway, std::string model_id) {
  return [&gateway, model_id = std::move(model_id)](const DocumentNode&, const std::string& prompt) {
    GatewayRequest req;
    req.model_id = model_id;
    req.prompt = prompt;
    req.max_tokens = 128;
    return gateway.complete(req);
  };
}

SummarizeResult summarize_document(const Document& doc, const Summarizer& summarizer, const SummarizeOptions& options) {
  SummarizeResult result{doc, {}};
  std::vector<Located> nodes;
  collect_preorder(result.document.root, result.document.root.title, nodes);

  for (const auto& [node, path] : nodes) {
    if (text::trim(node->body).empty() && node->children.empty()) {
      throw ContractError("node '" + path + "' has neither body nor children");
    }
  }

  auto summarize_one = [&](const Located& loc) -> std::string {
    try {
      return summarizer(*loc.node, prompts::summary_prompt(*loc.node));
    } catch (const std::exception& e) {
      throw IngestError("summarizing node '" + loc.path + "' failed: " + e.what(), loc.path, true);
    }
  };

  // Calls may overlap; results are assigned strictly in pre-order.
  const std::size_t batch = static_cast<std::size_t>(std::max(1, options.max_parallel));
  for (std::size_t start = 0; start < nodes.size(); start += batch) {
    const std::size_t end = std::min(nodes.size(), start + batch);
    std::vector<std::future<std::string>> pending;
    for (std::size_t i = start; i < end; ++i) {
      if (text::trim(nodes[i].node->body).empty()) {
        pending.emplace_back();
        continue;
      }
      pending.push_back(std::async(batch > 1 ? std::launch::async : std::launch::deferred, summarize_one,
                                   std::cref(nodes[i])));
    }
    for (std::size_t i = start; i < end; ++i) {
      auto& fut = pending[i - start];
      DocumentNode& node = *nodes[i].node;
      if (!fut.valid()) {
        node.summary = std::string();
        continue;
      }
      auto summary = text::trim(fut.get());
      const auto cap = summary_word_cap(node.title);
      const auto words = text::word_count(summary);
      if (words > cap) {
        result.warnings.push_back("node '" + nodes[i].path + "': summary truncated from " + std::to_string(words) +
                                  " to " + std::to_string(cap) + " words");
        summary = text::truncate_words(summary, cap);
      }
      node.summary = std::move(summary);
    }
  }
  return result;
}

std::string flatten_summary(const DocumentNode& node) {
  std::vector<std::string> parts;
  flatten_into(node, node.title, parts);
  return text::join(parts, "\n");
}

std::string flatten_summary(const Document& doc) { return flatten_summary(doc.root); }

std::vector<std::string> preorder_headings(const Document& doc) {
  std::vector<std::string> out;
  headings_into(doc.root, out);
  return out;
}

}  // namespace deckeval
