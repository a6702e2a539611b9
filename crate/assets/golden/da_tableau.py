import os
import tableauserverclient as TSC

auth = TSC.PersonalAccessTokenAuth(os.environ["TABLEAU_TOKEN_NAME"], os.environ["TABLEAU_TOKEN"])
server = TSC.Server("https://eu-west-1a.online.tableau.com", use_server_version=True)
with server.auth.sign_in(auth):
    for workbook in TSC.Pager(server.workbooks):
        print(workbook.name)
