#include "vizrec/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "vizrec/hashing.hpp"
#include "vizrec/parallel.hpp"
#include "vizrec/xml.hpp"

namespace vizrec::ingest {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(FieldClass fc) noexcept {
    switch (fc) {
    case FieldClass::SheetName: return "sheet_name";
    case FieldClass::Title: return "title";
    case FieldClass::Caption: return "caption";
    case FieldClass::AxisLabel: return "axis_label";
    case FieldClass::Annotation: return "annotation";
    }
    return "unknown";
}

std::string_view to_string(SheetKind kind) noexcept {
    return kind == SheetKind::View ? "view" : "dashboard";
}

FieldClass field_class_from_string(std::string_view name) {
    if (name == "sheet_name") return FieldClass::SheetName;
    if (name == "title") return FieldClass::Title;
    if (name == "caption") return FieldClass::Caption;
    if (name == "axis_label") return FieldClass::AxisLabel;
    if (name == "annotation") return FieldClass::Annotation;
    throw Error(ErrorCode::UnsupportedSchema, "unknown field class '" + std::string(name) + "'");
}

SheetKind sheet_kind_from_string(std::string_view name) {
    if (name == "view") return SheetKind::View;
    if (name == "dashboard") return SheetKind::Dashboard;
    throw Error(ErrorCode::UnsupportedSchema, "unknown sheet kind '" + std::string(name) + "'");
}

bool RawWorkbook::has_marks() const {
    return std::any_of(sheets.begin(), sheets.end(), [](const SheetRecord& s) { return s.has_marks; });
}

const SheetRecord* RawWorkbook::find_sheet(std::string_view name) const {
    for (const auto& s : sheets) {
        if (s.sheet_name == name) return &s;
    }
    return nullptr;
}

namespace {

std::string trim(std::string_view s) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return std::string(s);
}

// Text of a formatted-text container: concatenated `run` descendants, or the
// element's own character data when it has no runs.
std::string formatted_text(const xml::Node& node) {
    const auto runs = node.descendants_named("run");
    if (runs.empty()) return trim(node.text);
    std::string out;
    for (const auto* run : runs) out += run->text;
    return trim(out);
}

void add_field(SheetRecord& sheet, FieldClass fc, std::string text) {
    if (!text.empty()) sheet.text_fields.push_back({fc, std::move(text)});
}

bool detect_marks_node(const xml::Node& sheet) {
    bool found = false;
    sheet.for_each_descendant([&](const xml::Node& n) {
        if (n.name == "mark" || (n.name == "encodings" && !n.children.empty())) found = true;
    });
    return found;
}

void collect_view_text(const xml::Node& node, SheetRecord& sheet) {
    for (const auto& child : node.children) {
        const auto& n = *child;
        if (n.name == "title") {
            add_field(sheet, FieldClass::Title, formatted_text(n));
        } else if (n.name == "caption") {
            add_field(sheet, FieldClass::Caption, formatted_text(n));
        } else if (n.name == "annotation") {
            add_field(sheet, FieldClass::Annotation, formatted_text(n));
        } else if (n.name == "style-rule" && n.attr("element") == "axis") {
            for (const auto* fmt : n.children_named("format")) {
                if (fmt->attr("attr") == "title") {
                    if (auto v = fmt->attr("value")) add_field(sheet, FieldClass::AxisLabel, trim(*v));
                }
            }
        } else {
            collect_view_text(n, sheet);
        }
    }
}

void collect_dashboard(const xml::Node& node, SheetRecord& sheet,
                       const std::set<std::string, std::less<>>& view_names) {
    for (const auto& child : node.children) {
        const auto& n = *child;
        if (n.name == "title") {
            add_field(sheet, FieldClass::Title, formatted_text(n));
        } else if (n.name == "caption") {
            add_field(sheet, FieldClass::Caption, formatted_text(n));
        } else if (n.name == "zone") {
            if (n.attr("type") == "text") {
                add_field(sheet, FieldClass::Annotation, formatted_text(n));
                continue;
            }
            if (auto name = n.attr("name"); name && view_names.count(*name)) {
                const std::string ref(*name);
                if (std::find(sheet.referenced_sheets.begin(), sheet.referenced_sheets.end(), ref) ==
                    sheet.referenced_sheets.end()) {
                    sheet.referenced_sheets.push_back(ref);
                }
            }
            collect_dashboard(n, sheet, view_names);
        } else {
            collect_dashboard(n, sheet, view_names);
        }
    }
}

std::string column_label(const xml::Node& column) {
    if (auto caption = column.attr("caption")) {
        auto t = trim(*caption);
        if (!t.empty()) return t;
    }
    auto name = trim(column.attr("name").value_or(""));
    if (name.size() >= 2 && name.front() == '[' && name.back() == ']') {
        name = trim(std::string_view(name).substr(1, name.size() - 2));
    }
    return name;
}

std::string required_sheet_name(const xml::Node& node) {
    auto name = trim(node.attr("name").value_or(""));
    if (name.empty()) {
        throw Error(ErrorCode::UnsupportedSchema, "<" + node.name + "> without a name attribute");
    }
    return name;
}

}  // namespace

bool detect_marks(std::string_view sheet_xml) {
    std::unique_ptr<xml::Node> root;
    try {
        root = xml::parse(sheet_xml);
    } catch (const std::runtime_error& e) {
        throw Error(ErrorCode::MalformedXml, e.what());
    }
    return detect_marks_node(*root);
}

RawWorkbook parse_workbook(std::string_view xml_bytes, const std::string& id) {
    std::unique_ptr<xml::Node> root;
    try {
        root = xml::parse(xml_bytes);
    } catch (const std::runtime_error& e) {
        throw Error(ErrorCode::MalformedXml, e.what());
    }
    if (root->name != "workbook") {
        throw Error(ErrorCode::UnsupportedSchema, "root element <" + root->name + "> is not <workbook>");
    }

    RawWorkbook wb;
    wb.id = id;
    wb.title = trim(root->attr("name").value_or(""));
    wb.author = trim(root->attr("author").value_or(""));
    wb.modified_date = trim(root->attr("modified").value_or(""));

    if (const auto* sources = root->child("datasources")) {
        for (const auto* ds : sources->children_named("datasource")) {
            DataSourceRecord rec;
            rec.datasource_name = trim(ds->attr("caption").value_or(ds->attr("name").value_or("")));
            for (const auto* column : ds->children_named("column")) {
                auto label = column_label(*column);
                if (!label.empty()) rec.column_captions.push_back(std::move(label));
            }
            wb.datasources.push_back(std::move(rec));
        }
    }

    std::set<std::string, std::less<>> view_names;
    if (const auto* worksheets = root->child("worksheets")) {
        for (const auto* ws : worksheets->children_named("worksheet")) {
            SheetRecord sheet;
            sheet.sheet_name = required_sheet_name(*ws);
            sheet.kind = SheetKind::View;
            collect_view_text(*ws, sheet);
            sheet.has_marks = detect_marks_node(*ws);
            view_names.insert(sheet.sheet_name);
            wb.sheets.push_back(std::move(sheet));
        }
    }
    if (const auto* dashboards = root->child("dashboards")) {
        for (const auto* db : dashboards->children_named("dashboard")) {
            SheetRecord sheet;
            sheet.sheet_name = required_sheet_name(*db);
            sheet.kind = SheetKind::Dashboard;
            collect_dashboard(*db, sheet, view_names);
            wb.sheets.push_back(std::move(sheet));
        }
    }

    wb.language_tag = detect_language(wb);
    return wb;
}

RawWorkbook parse_workbook_json(std::string_view json_bytes, const std::string& id) {
    json doc;
    try {
        doc = json::parse(json_bytes);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::MalformedJson, e.what());
    }
    if (!doc.is_object() || !doc.contains("sheets") || !doc["sheets"].is_array()) {
        throw Error(ErrorCode::UnsupportedSchema, "workbook JSON must be an object with a 'sheets' array");
    }
    try {
        RawWorkbook wb;
        wb.id = id;
        wb.title = doc.value("title", "");
        wb.author = doc.value("author", "");
        wb.modified_date = doc.value("modified_date", "");
        for (const auto& s : doc["sheets"]) {
            SheetRecord sheet;
            sheet.sheet_name = trim(s.at("sheet_name").get<std::string>());
            if (sheet.sheet_name.empty()) throw Error(ErrorCode::UnsupportedSchema, "empty sheet_name");
            sheet.kind = sheet_kind_from_string(s.value("kind", "view"));
            sheet.has_marks = s.value("has_marks", false);
            for (const auto& f : s.value("text_fields", json::array())) {
                add_field(sheet, field_class_from_string(f.at("class").get<std::string>()),
                          trim(f.at("text").get<std::string>()));
            }
            if (sheet.kind == SheetKind::Dashboard) {
                sheet.referenced_sheets = s.value("referenced_sheets", std::vector<std::string>{});
            }
            wb.sheets.push_back(std::move(sheet));
        }
        for (const auto& d : doc.value("datasources", json::array())) {
            DataSourceRecord rec;
            rec.datasource_name = d.value("datasource_name", "");
            for (const auto& c : d.value("column_captions", std::vector<std::string>{})) {
                auto t = trim(c);
                if (!t.empty()) rec.column_captions.push_back(std::move(t));
            }
            wb.datasources.push_back(std::move(rec));
        }
        wb.language_tag = doc.contains("language_tag") ? doc["language_tag"].get<std::string>()
                                                       : detect_language(wb);
        return wb;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::UnsupportedSchema, e.what());
    }
}

std::string workbook_to_json(const RawWorkbook& wb) {
    json sheets = json::array();
    for (const auto& s : wb.sheets) {
        json fields = json::array();
        for (const auto& f : s.text_fields) {
            fields.push_back({{"class", to_string(f.field_class)}, {"text", f.text}});
        }
        json sheet = {{"sheet_name", s.sheet_name},
                      {"kind", to_string(s.kind)},
                      {"has_marks", s.has_marks},
                      {"text_fields", fields}};
        if (s.kind == SheetKind::Dashboard) sheet["referenced_sheets"] = s.referenced_sheets;
        sheets.push_back(std::move(sheet));
    }
    json sources = json::array();
    for (const auto& d : wb.datasources) {
        sources.push_back({{"datasource_name", d.datasource_name}, {"column_captions", d.column_captions}});
    }
    json doc = {{"title", wb.title},
                {"author", wb.author},
                {"modified_date", wb.modified_date},
                {"language_tag", wb.language_tag},
                {"sheets", sheets},
                {"datasources", sources}};
    return doc.dump(2);
}

std::string detect_language(const RawWorkbook& wb) {
    static const std::unordered_set<std::string> english = {
        "the", "of", "and", "to", "in", "for", "by", "on", "with", "at", "from", "per", "vs",
        "is", "are", "was", "were", "this", "that", "these", "how", "what", "which", "who",
        "an", "or", "as", "its", "their", "over", "across", "between", "top", "total", "average",
    };
    // Function words that are not also English words.
    static const std::unordered_set<std::string> foreign = {
        "der", "die", "das", "und", "nach", "mit", "von", "ist", "sind", "le", "la", "les",
        "des", "du", "et", "par", "pour", "avec", "est", "sont", "el", "los", "las", "del",
        "por", "para", "con", "una", "es", "il", "della", "degli", "het", "een", "voor",
        "naar", "dos", "em", "och",
    };
    std::size_t english_hits = 0;
    std::size_t foreign_hits = 0;
    auto scan = [&](std::string_view text) {
        std::string word;
        auto flush = [&] {
            if (!word.empty()) {
                if (english.count(word)) ++english_hits;
                else if (foreign.count(word)) ++foreign_hits;
                word.clear();
            }
        };
        for (char c : text) {
            if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) {
                word += static_cast<char>(c | 0x20);
            } else {
                flush();
            }
        }
        flush();
    };
    scan(wb.title);
    for (const auto& s : wb.sheets) {
        scan(s.sheet_name);
        for (const auto& f : s.text_fields) scan(f.text);
    }
    for (const auto& d : wb.datasources) {
        for (const auto& c : d.column_captions) scan(c);
    }
    return foreign_hits > english_hits ? "und" : "en";
}

std::string workbook_id_for(const fs::path& relative_path) {
    return hex64(fnv1a64(relative_path.generic_string()));
}

namespace {

bool has_supported_extension(const fs::path& p, std::string& ext) {
    ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".twb" || ext == ".xml" || ext == ".json";
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::IoError, "read failed for " + path.string());
    return ss.str();
}

}  // namespace

Repository load_repository(const fs::path& root, unsigned workers) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw Error(ErrorCode::IoError, "repository root is not a readable directory: " + root.string());
    }

    std::vector<fs::path> files;
    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot list " + root.string() + ": " + ec.message());
    for (const auto& entry : it) {
        std::string ext;
        if (entry.is_regular_file(ec) && has_supported_extension(entry.path(), ext)) {
            files.push_back(fs::relative(entry.path(), root).lexically_normal());
        }
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.generic_string() < b.generic_string(); });

    struct Slot {
        std::optional<RawWorkbook> workbook;
        std::optional<LoadIssue> issue;
    };
    std::vector<Slot> slots(files.size());
    parallel_for(files.size(), workers, [&](std::size_t i) {
        const auto& rel = files[i];
        const auto rel_str = rel.generic_string();
        try {
            const auto bytes = read_file(root / rel);
            std::string ext;
            has_supported_extension(rel, ext);
            const auto id = workbook_id_for(rel);
            RawWorkbook wb = ext == ".json" ? parse_workbook_json(bytes, id) : parse_workbook(bytes, id);
            wb.source_path = rel_str;
            if (wb.title.empty()) wb.title = rel.stem().string();
            slots[i].workbook = std::move(wb);
        } catch (const Error& e) {
            slots[i].issue = LoadIssue{rel_str, e.code(), e.what()};
        }
    });

    Repository repo;
    repo.report.files_seen = files.size();
    std::unordered_set<std::string> ids;
    for (auto& slot : slots) {
        if (slot.issue) {
            spdlog::warn("skipping {}: {}", slot.issue->path, slot.issue->message);
            repo.report.issues.push_back(std::move(*slot.issue));
            continue;
        }
        auto& wb = *slot.workbook;
        if (!ids.insert(wb.id).second) {
            repo.report.issues.push_back(
                {wb.source_path, ErrorCode::UnsupportedSchema, "duplicate workbook id " + wb.id});
            continue;
        }
        repo.workbooks.push_back(std::move(wb));
    }
    return repo;
}

}  // namespace vizrec::ingest
