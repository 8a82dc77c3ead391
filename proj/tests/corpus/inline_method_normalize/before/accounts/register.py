def _normalize_email(raw):
    cleaned = raw.strip().lower()
    local, _, domain = cleaned.partition("@")
    if "+" in local:
        local = local.split("+", 1)[0]
    return local + "@" + domain


def register(users, raw_email, name):
    email = _normalize_email(raw_email)
    if email in users:
        raise KeyError(email)
    users[email] = name
    return email
