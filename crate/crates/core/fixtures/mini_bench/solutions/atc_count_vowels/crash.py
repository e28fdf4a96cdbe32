s = input().strip()
print(s[len(s)])
