#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vizrec/error.hpp"

namespace vizrec::ingest {

enum class FieldClass { SheetName, Title, Caption, AxisLabel, Annotation };
enum class SheetKind { View, Dashboard };

std::string_view to_string(FieldClass fc) noexcept;
std::string_view to_string(SheetKind kind) noexcept;
FieldClass field_class_from_string(std::string_view name);
SheetKind sheet_kind_from_string(std::string_view name);

struct TextField {
    FieldClass field_class;
    std::string text;

    bool operator==(const TextField&) const = default;
};

struct SheetRecord {
    std::string sheet_name;
    SheetKind kind = SheetKind::View;
    std::vector<TextField> text_fields;
    bool has_marks = false;
    std::vector<std::string> referenced_sheets;  // dashboards only

    bool operator==(const SheetRecord&) const = default;
};

struct DataSourceRecord {
    std::string datasource_name;
    std::vector<std::string> column_captions;

    bool operator==(const DataSourceRecord&) const = default;
};

struct RawWorkbook {
    std::string id;
    std::string title;
    std::string author;
    std::string modified_date;
    std::vector<SheetRecord> sheets;
    std::vector<DataSourceRecord> datasources;
    std::string language_tag = "und";
    std::string source_path;

    bool has_marks() const;
    const SheetRecord* find_sheet(std::string_view name) const;

    bool operator==(const RawWorkbook&) const = default;
};

/// Parses a .twb-style workbook. Supported element paths, relative to the
/// root `workbook` element:
///
///   @name, @author, @modified                      workbook metadata
///   worksheets/worksheet/@name                     view sheet names
///   worksheets/worksheet//title//run               title text
///   worksheets/worksheet//caption//run             caption text
///   worksheets/worksheet//style-rule[@element='axis']/format[@attr='title']/@value
///   worksheets/worksheet//annotation//run          annotation text
///   worksheets/worksheet//mark, //encodings/*      visual marks
///   dashboards/dashboard/@name                     dashboard sheet names
///   dashboards/dashboard//title//run, //caption//run
///   dashboards/dashboard//zone/@name               member-sheet references
///   dashboards/dashboard//zone[@type='text']//run  dashboard annotations
///   datasources/datasource/column/@caption (falls back to @name)
///
/// Runs inside one formatted-text block are concatenated. Every other element
/// is ignored.
RawWorkbook parse_workbook(std::string_view xml_bytes, const std::string& id);

/// True iff the sheet XML fragment (a `worksheet` element) declares at least
/// one `mark` element or a non-empty `encodings` element.
bool detect_marks(std::string_view sheet_xml);

/// JSON mirror of RawWorkbook for repositories that are not XML based.
RawWorkbook parse_workbook_json(std::string_view json_bytes, const std::string& id);
std::string workbook_to_json(const RawWorkbook& wb);

/// "en" unless the workbook's text hits more non-English function words than
/// English ones.
std::string detect_language(const RawWorkbook& wb);

struct LoadIssue {
    std::string path;
    ErrorCode code;
    std::string message;
};

struct LoadReport {
    std::vector<LoadIssue> issues;
    std::size_t files_seen = 0;
};

struct Repository {
    std::vector<RawWorkbook> workbooks;  // ordered by relative path
    LoadReport report;
};

/// Id assigned to a file: hex FNV-1a of its repository-relative path.
std::string workbook_id_for(const std::filesystem::path& relative_path);

/// Loads every *.twb, *.xml and *.json file below root (recursively).
/// Per-file failures go to the report; only an unreadable root throws.
Repository load_repository(const std::filesystem::path& root, unsigned workers = 1);

}  // namespace vizrec::ingest
