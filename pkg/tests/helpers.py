import os


FIXTURES_FOLDER = os.path.join("tests", "fixtures")


def delete_files_in_folder(folder, filter_out=None):
    for file_name in os.listdir(folder):
        file_path = os.path.join(folder, file_name)
        if filter_out and file_name in filter_out:
            continue
        if os.path.isdir(file_path):
            delete_files_in_folder(file_path)
            os.rmdir(file_path)
        elif os.path.isfile(file_path):
            os.remove(file_path)


def fixture_path(filename):
    "path of a configuration fixture, relative to the repository root"
    return os.path.join(FIXTURES_FOLDER, filename)


def read_log_file_lines(log_file_path):
    "read a log or CSV file as a list of lines for use in test assertions"
    with open(log_file_path, "r", encoding="utf-8") as open_file:
        return list(open_file)
